#include "dm/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dm/rng.hpp"

namespace dm {

namespace {

constexpr double kLogFloor = 1e-12;

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

std::vector<double> row_copy(const kernels::Matrix& m, std::size_t r) {
    return {m.row(r), m.row(r) + m.cols};
}

void mask_in_place(kernels::Matrix& m, const kernels::Matrix& mask) {
    require(m.same_shape(mask), "dropout mask shape mismatch");
    for (std::size_t n = 0; n < m.data.size(); ++n)
        m.data[n] *= mask.data[n];
}

} // namespace

std::string to_string(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::Sigmoid: return "sigmoid";
        case ActivationKind::Tanh: return "tanh";
        case ActivationKind::Relu: return "relu";
    }
    throw std::logic_error("unknown activation");
}

ActivationKind activation_from_string(const std::string& name) {
    if (name == "sigmoid") return ActivationKind::Sigmoid;
    if (name == "tanh") return ActivationKind::Tanh;
    if (name == "relu") return ActivationKind::Relu;
    throw std::invalid_argument("unknown activation '" + name + "'");
}

void NetworkSpec::check() const {
    require(input_dim > 0, "input_dim must be positive");
    require(output_dim > 0, "output_dim must be positive");
    for (int w : hidden) require(w > 0, "hidden width must be positive");
}

std::size_t NetworkParams::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l)
        n += weights[l].data.size() + biases[l].size();
    return n;
}

void NetworkParams::check() const {
    spec.check();
    auto layers = static_cast<std::size_t>(spec.layer_count());
    require(weights.size() == layers && biases.size() == layers,
            "layer count mismatch");
    std::size_t fan_in = static_cast<std::size_t>(spec.input_dim);
    for (std::size_t l = 0; l < layers; ++l) {
        std::size_t fan_out = l < spec.hidden.size()
                                  ? static_cast<std::size_t>(spec.hidden[l])
                                  : static_cast<std::size_t>(spec.output_dim);
        require(weights[l].rows == fan_in && weights[l].cols == fan_out,
                "weight shape mismatch");
        require(biases[l].size() == fan_out, "bias shape mismatch");
        for (double v : weights[l].data)
            require(std::isfinite(v), "non-finite weight");
        for (double v : biases[l])
            require(std::isfinite(v), "non-finite bias");
        fan_in = fan_out;
    }
}

NetworkParams init_network(const NetworkSpec& spec, std::uint64_t seed) {
    spec.check();
    NetworkParams params;
    params.spec = spec;
    Rng rng(seed);
    std::size_t fan_in = static_cast<std::size_t>(spec.input_dim);
    for (int l = 0; l < spec.layer_count(); ++l) {
        std::size_t fan_out = l < static_cast<int>(spec.hidden.size())
                                  ? static_cast<std::size_t>(spec.hidden[l])
                                  : static_cast<std::size_t>(spec.output_dim);
        double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        kernels::Matrix w(fan_in, fan_out);
        for (double& v : w.data) v = rng.next_double(-limit, limit);
        params.weights.push_back(std::move(w));
        params.biases.emplace_back(fan_out, 0.0);
        fan_in = fan_out;
    }
    return params;
}

BatchTrace forward_batch(const NetworkParams& params, const kernels::Matrix& inputs,
                         const DropoutMasks* masks) {
    require(inputs.cols == static_cast<std::size_t>(params.spec.input_dim),
            "input dimension mismatch");
    require(inputs.rows > 0, "empty batch");
    for (double v : inputs.data)
        require(std::isfinite(v), "non-finite input");
    if (masks)
        require(masks->size() == params.spec.hidden.size(),
                "one dropout mask per hidden layer expected");

    BatchTrace trace;
    auto layers = static_cast<std::size_t>(params.spec.layer_count());
    trace.pre.resize(layers);
    trace.post.resize(layers);
    trace.fed.resize(layers);

    const kernels::Matrix* current = &inputs;
    for (std::size_t l = 0; l < layers; ++l) {
        kernels::linear_forward(*current, params.weights[l], params.biases[l],
                                trace.pre[l]);
        if (l + 1 == layers) {
            kernels::softmax_rows(trace.pre[l], trace.post[l]);
            trace.fed[l] = trace.post[l];
        } else {
            kernels::activation_forward(params.spec.activation, trace.pre[l],
                                        trace.post[l]);
            trace.fed[l] = trace.post[l];
            if (masks) mask_in_place(trace.fed[l], (*masks)[l]);
        }
        current = &trace.fed[l];
    }
    return trace;
}

ForwardTrace forward(const NetworkParams& params, const std::vector<double>& input) {
    kernels::Matrix x(1, input.size());
    x.data = input;
    BatchTrace batch = forward_batch(params, x);
    ForwardTrace trace;
    for (std::size_t l = 0; l < batch.pre.size(); ++l) {
        trace.pre.push_back(row_copy(batch.pre[l], 0));
        trace.post.push_back(row_copy(batch.post[l], 0));
    }
    return trace;
}

double loss(const std::vector<double>& p, int target, int k) {
    require(static_cast<int>(p.size()) == k, "distribution size mismatch");
    require(target >= 0 && target < k, "target class out of range");
    return -std::log(std::max(p[static_cast<std::size_t>(target)], kLogFloor));
}

double batch_loss(const kernels::Matrix& probs, const std::vector<int>& targets) {
    require(probs.rows == targets.size() && !targets.empty(), "batch size mismatch");
    double total = 0.0;
    for (std::size_t s = 0; s < probs.rows; ++s) {
        int t = targets[s];
        require(t >= 0 && t < static_cast<int>(probs.cols), "target class out of range");
        total += -std::log(std::max(probs.at(s, static_cast<std::size_t>(t)), kLogFloor));
    }
    return total / static_cast<double>(probs.rows);
}

GradientSet gradients(const NetworkParams& params, const kernels::Matrix& inputs,
                      const std::vector<int>& targets, const DropoutMasks* masks) {
    require(inputs.rows == targets.size() && !targets.empty(), "batch size mismatch");
    BatchTrace trace = forward_batch(params, inputs, masks);

    auto layers = static_cast<std::size_t>(params.spec.layer_count());
    const std::size_t batch = inputs.rows;
    const double scale = 1.0 / static_cast<double>(batch);

    GradientSet grads;
    grads.weights.resize(layers);
    grads.biases.resize(layers);
    grads.loss = batch_loss(trace.probs(), targets);

    // Output-layer pre-activation gradient is p - d, one-hot d at the target.
    kernels::Matrix delta = trace.probs();
    for (std::size_t s = 0; s < batch; ++s)
        delta.at(s, static_cast<std::size_t>(targets[s])) -= 1.0;

    for (std::size_t l = layers; l-- > 0;) {
        const kernels::Matrix& fed_in = l == 0 ? inputs : trace.fed[l - 1];
        kernels::grad_weights(fed_in, delta, scale, grads.weights[l]);
        kernels::grad_bias(delta, scale, grads.biases[l]);
        if (l == 0) break;
        kernels::Matrix dprev;
        kernels::delta_backward(delta, params.weights[l], dprev);
        if (masks) mask_in_place(dprev, (*masks)[l - 1]);
        kernels::activation_backward(params.spec.activation, trace.pre[l - 1],
                                     trace.post[l - 1], dprev, delta);
    }
    return grads;
}

void apply_update(NetworkParams& params, const GradientSet& grads, double lr) {
    require(lr > 0.0, "learning rate must be positive");
    require(grads.weights.size() == params.weights.size(), "gradient shape mismatch");
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        kernels::descend(params.weights[l], grads.weights[l], lr);
        kernels::descend(params.biases[l], grads.biases[l], lr);
    }
}

int argmax_lowest(const std::vector<double>& p) {
    require(!p.empty(), "empty distribution");
    int best = 0;
    for (int j = 1; j < static_cast<int>(p.size()); ++j)
        if (p[static_cast<std::size_t>(j)] > p[static_cast<std::size_t>(best)]) best = j;
    return best;
}

std::pair<int, std::vector<double>> predict(const NetworkParams& params,
                                            const std::vector<double>& input) {
    ForwardTrace trace = forward(params, input);
    std::vector<double> p = trace.probs();
    return {argmax_lowest(p), std::move(p)};
}

std::vector<double> rescale_by_priors(const std::vector<double>& p,
                                      const std::vector<double>& priors,
                                      PriorScaling scaling) {
    require(p.size() == priors.size() && !p.empty(), "prior support mismatch");
    bool constant = true;
    for (std::size_t j = 0; j < priors.size(); ++j) {
        require(priors[j] > 0.0, "priors must be strictly positive");
        constant = constant && priors[j] == priors[0];
    }
    // A constant prior cannot change the distribution after renormalization.
    if (constant) return p;
    std::vector<double> q(p.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        q[j] = scaling == PriorScaling::Divide ? p[j] / priors[j] : p[j] * priors[j];
        sum += q[j];
    }
    require(sum > 0.0, "degenerate rescaled distribution");
    for (double& v : q) v /= sum;
    return q;
}

std::vector<int> predict_batch(const NetworkParams& params,
                               const std::vector<std::vector<double>>& inputs,
                               const std::vector<double>* priors, PriorScaling scaling) {
    std::vector<int> out;
    out.reserve(inputs.size());
    const std::size_t dim = static_cast<std::size_t>(params.spec.input_dim);
    constexpr std::size_t kChunk = 512;
    for (std::size_t start = 0; start < inputs.size(); start += kChunk) {
        std::size_t n = std::min(kChunk, inputs.size() - start);
        kernels::Matrix x(n, dim);
        for (std::size_t s = 0; s < n; ++s) {
            require(inputs[start + s].size() == dim, "input dimension mismatch");
            std::copy(inputs[start + s].begin(), inputs[start + s].end(), x.row(s));
        }
        BatchTrace trace = forward_batch(params, x);
        const kernels::Matrix& probs = trace.probs();
        for (std::size_t s = 0; s < n; ++s) {
            std::vector<double> p = row_copy(probs, s);
            if (priors) p = rescale_by_priors(p, *priors, scaling);
            out.push_back(argmax_lowest(p));
        }
    }
    return out;
}

} // namespace dm
