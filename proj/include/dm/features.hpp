#ifndef DM_FEATURES_HPP
#define DM_FEATURES_HPP

#include <optional>
#include <string>
#include <vector>

#include "dm/corpus.hpp"

namespace dm {

enum class FeatureMode { DialogRegister, DialogChanges };

std::string to_string(FeatureMode mode);
FeatureMode feature_mode_from_string(const std::string& s);

struct EncoderConfig {
    FeatureMode mode = FeatureMode::DialogRegister;
    double threshold = 0.5;     // confidence threshold for code 1 vs 2
    int context = 0;            // window size n: n previous turns are joined
    bool include_prev_act = false;
    SlotSchema schema;

    // per-turn feature width D
    std::size_t turn_width() const {
        return schema.slots.size() + (include_prev_act ? 1 : 0);
    }
    // network input width D * (context + 1)
    std::size_t input_width() const {
        return turn_width() * static_cast<std::size_t>(context + 1);
    }
};

// Cumulative per-slot state of the whole dialog so far.
// Codes: 0 not given, 1 given with high confidence, 2 given with low confidence.
struct DialogRegister {
    std::vector<int> codes;
    std::optional<int> prev_act;

    static DialogRegister initial(const SlotSchema& schema) {
        return {std::vector<int>(schema.slots.size(), 0), std::nullopt};
    }
};

// Per-slot deltas of the current turn only.
// Codes: 0 unchanged, 1 new high confidence, 2 low confidence,
// 4 previously low now provided with high confidence.
struct DialogChanges {
    std::vector<int> codes;
    std::optional<int> prev_act;
};

// Applies one user observation to a register. Unmentioned slots keep their
// code; a mentioned slot becomes 1 when confidence > threshold, else 2.
DialogRegister update_register(const DialogRegister& prev, const UserObservation& obs,
                               double threshold, const SlotSchema& schema);

DialogChanges derive_changes(const DialogRegister& prev_dr, const DialogRegister& new_dr);

// Slot codes as reals, with the previous system act appended as one scalar
// index when configured (-1 on the first turn).
std::vector<double> encode_turn(const DialogRegister& state, const EncoderConfig& config);
std::vector<double> encode_turn(const DialogChanges& state, const EncoderConfig& config);

// Concatenates the n previous per-turn vectors and the current one, oldest
// first; missing history is padded with zero vectors on the left.
std::vector<double> build_window(const std::vector<std::vector<double>>& history,
                                 int context);

struct Normalizer {
    std::vector<double> mean;
    std::vector<double> scale; // stddev, or 1 for near-constant dimensions
};

Normalizer fit_normalizer(const std::vector<std::vector<double>>& train_inputs);
std::vector<double> normalize(const std::vector<double>& v, const Normalizer& norm);

struct FeatureDataset {
    std::vector<std::vector<double>> inputs;
    std::vector<int> labels; // system-act indices
    EncoderConfig encoder;
    std::optional<Normalizer> normalizer;

    std::size_t size() const { return inputs.size(); }
};

// Runs the full pipeline over a corpus: registers rebuilt per dialog from the
// all-zero state, per-turn vectors per config.mode, windows per config.context.
// The previous-act feature uses the gold act of the preceding turn.
FeatureDataset build_dataset(const DialogCorpus& corpus, const EncoderConfig& config);

// Rewrites dataset.inputs in place; records the normalizer in the dataset.
void apply_normalizer(FeatureDataset& dataset, const Normalizer& norm);

// Debug dump: header f0..f{D*(n+1)-1},label then one row per sample.
std::string dataset_to_csv(const FeatureDataset& dataset);

} // namespace dm

#endif
