#ifndef DM_NETWORK_HPP
#define DM_NETWORK_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dm/kernels.hpp"

namespace dm {

std::string to_string(ActivationKind kind);
ActivationKind activation_from_string(const std::string& name);

struct NetworkSpec {
    int input_dim = 0;
    std::vector<int> hidden;
    ActivationKind activation = ActivationKind::Sigmoid;
    int output_dim = 0;

    // Layer count including the softmax output layer.
    int layer_count() const { return static_cast<int>(hidden.size()) + 1; }
    void check() const;
};

// weights[l] is fan_in x fan_out, biases[l] has fan_out entries; the last
// layer feeds the softmax.
struct NetworkParams {
    NetworkSpec spec;
    std::vector<kernels::Matrix> weights;
    std::vector<std::vector<double>> biases;

    std::size_t parameter_count() const;
    void check() const;
};

struct ForwardTrace {
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> post;

    const std::vector<double>& probs() const { return post.back(); }
};

// Batched trace kept in matrix form for training. `fed[l]` is what actually
// entered layer l+1; it differs from `post[l]` only under dropout.
struct BatchTrace {
    std::vector<kernels::Matrix> pre;
    std::vector<kernels::Matrix> post;
    std::vector<kernels::Matrix> fed;

    const kernels::Matrix& probs() const { return post.back(); }
};

struct GradientSet {
    std::vector<kernels::Matrix> weights;
    std::vector<std::vector<double>> biases;
    double loss = 0.0;
};

// Inverted-dropout masks for the hidden layers: entries are 0 or 1/(1-rate).
// Empty vector means no dropout anywhere.
using DropoutMasks = std::vector<kernels::Matrix>;

NetworkParams init_network(const NetworkSpec& spec, std::uint64_t seed);

ForwardTrace forward(const NetworkParams& params, const std::vector<double>& input);
BatchTrace forward_batch(const NetworkParams& params, const kernels::Matrix& inputs,
                         const DropoutMasks* masks = nullptr);

// Mean cross-entropy of a single distribution / a batch of them.
double loss(const std::vector<double>& p, int target, int k);
double batch_loss(const kernels::Matrix& probs, const std::vector<int>& targets);

GradientSet gradients(const NetworkParams& params, const kernels::Matrix& inputs,
                      const std::vector<int>& targets,
                      const DropoutMasks* masks = nullptr);

void apply_update(NetworkParams& params, const GradientSet& grads, double lr);

int argmax_lowest(const std::vector<double>& p);
std::pair<int, std::vector<double>> predict(const NetworkParams& params,
                                            const std::vector<double>& input);

enum class PriorScaling { Divide, Multiply };
std::vector<double> rescale_by_priors(const std::vector<double>& p,
                                      const std::vector<double>& priors,
                                      PriorScaling scaling = PriorScaling::Divide);

// Argmax predictions for many inputs at once, optionally prior-rescaled.
std::vector<int> predict_batch(const NetworkParams& params,
                               const std::vector<std::vector<double>>& inputs,
                               const std::vector<double>* priors = nullptr,
                               PriorScaling scaling = PriorScaling::Divide);

} // namespace dm

#endif
