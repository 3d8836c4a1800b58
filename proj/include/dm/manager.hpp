#ifndef DM_MANAGER_HPP
#define DM_MANAGER_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dm/features.hpp"
#include "dm/network.hpp"

namespace dm {

// Everything a deployment needs: trained parameters, the feature recipe they
// were trained with, normalization statistics, and optional class priors for
// balanced prediction.
struct LoadedPolicy {
    NetworkParams params;
    Normalizer normalizer;
    EncoderConfig encoder;
    std::optional<std::vector<double>> priors; // aligned with schema.system_acts
    PriorScaling scaling = PriorScaling::Divide;

    // Throws DataError when dimensions disagree (network input width vs
    // encoder window width, normalizer width, prior support).
    void check() const;
};

// "dmmodel/1" JSON artifact; doubles keep full round-trip precision.
std::string policy_to_json(const LoadedPolicy& policy);
LoadedPolicy policy_from_json(const std::string& text);
void save_policy(const LoadedPolicy& policy, const std::filesystem::path& path);
LoadedPolicy load_policy(const std::filesystem::path& path);

// One live dialog over a shared immutable policy. Mirrors the dataset path:
// the same register updates, encoding, windowing, and normalization, so
// replaying a corpus dialog reproduces the offline predictions.
class Session {
public:
    explicit Session(const LoadedPolicy& policy);

    // Consumes one user observation and emits the chosen system act with the
    // full output distribution (prior-rescaled when the policy carries
    // priors). The emitted act becomes the next turn's prev-act feature.
    std::pair<std::string, std::vector<double>> step(const UserObservation& obs);

    // Replaces the prev-act feature for the next turn; used when replaying
    // corpora where the gold act, not the model's, drives the history.
    void force_last_act(const std::string& act);

    void reset();

    const DialogRegister& register_state() const { return register_; }
    std::optional<int> last_act() const { return last_act_; }
    int turn_count() const { return turns_; }

private:
    const LoadedPolicy* policy_;
    DialogRegister register_;
    std::vector<std::vector<double>> history_;
    std::optional<int> last_act_;
    int turns_ = 0;
};

} // namespace dm

#endif
