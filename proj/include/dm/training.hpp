#ifndef DM_TRAINING_HPP
#define DM_TRAINING_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dm/features.hpp"
#include "dm/network.hpp"

namespace dm {

struct BatchStrategy {
    enum class Kind { PerSample, MiniBatch, PerEpoch };
    Kind kind = Kind::MiniBatch;
    int size = 8; // only meaningful for MiniBatch

    static BatchStrategy per_sample() { return {Kind::PerSample, 1}; }
    static BatchStrategy minibatch(int n) { return {Kind::MiniBatch, n}; }
    static BatchStrategy per_epoch() { return {Kind::PerEpoch, 0}; }

    bool operator==(const BatchStrategy& o) const {
        return kind == o.kind && (kind != Kind::MiniBatch || size == o.size);
    }
};

std::string to_string(const BatchStrategy& b);
BatchStrategy batch_strategy_from_string(const std::string& s);

struct Hyperparams {
    std::vector<int> hidden;
    ActivationKind activation = ActivationKind::Sigmoid;
    double lr = 0.5;
    BatchStrategy batch = BatchStrategy::minibatch(8);
    int epochs = 50;
    double dropout = 0.0;
    std::uint64_t seed = 0;

    void check() const;
};

Hyperparams baseline_hyperparams();
Hyperparams tuned_hyperparams();

struct TrainReport {
    std::vector<double> epoch_loss;
    struct CheckpointEval {
        int epoch;
        double val_er_percent;
    };
    std::vector<CheckpointEval> checkpoints; // empty without a validation set
    int selected_epoch = 0;
    double wall_seconds = 0.0;
};

// {5,10,15,25,50,75,100} clipped to [1, epochs]; falls back to {epochs} when
// the intersection is empty so training always ends on a checkpoint.
std::vector<int> checkpoint_epochs(int epochs);

// Dataset must already be normalized by the caller. With a validation set the
// returned parameters are the checkpoint with the lowest validation ER
// (earliest epoch on ties); otherwise the final epoch's parameters.
std::pair<NetworkParams, TrainReport> train(const FeatureDataset& dataset,
                                            const Hyperparams& hp,
                                            const FeatureDataset* validation = nullptr);

struct SweepGrid {
    std::vector<int> depths;
    std::vector<int> widths;
    std::vector<ActivationKind> activations;
    std::vector<double> lrs;
    std::vector<BatchStrategy> batches;
    std::vector<int> epochs;
    std::vector<double> dropouts;
    std::uint64_t seed = 0;

    std::size_t entry_count() const;
    // Entry i of the cartesian product; depth varies slowest, dropout fastest.
    Hyperparams entry(std::size_t i) const;
};

// Depths 0..6, widths 8..1024 doubling, all three activations; remaining axes
// pinned to the baseline values with 100 epochs so every checkpoint is seen.
SweepGrid paper_grid(std::uint64_t seed);

struct SweepEntry {
    Hyperparams hp;
    std::size_t index = 0; // position in the cartesian product
    std::size_t param_count = 0;
    double val_er_percent = 0.0;
    int selected_epoch = 0;
};

struct SweepReport {
    std::vector<SweepEntry> entries; // sorted: ER asc, then params, then index
    double wall_seconds = 0.0;
};

SweepReport sweep(const FeatureDataset& dataset, const SweepGrid& grid,
                  const FeatureDataset& validation, int jobs = 1);

std::string render_sweep(const SweepReport& report, std::size_t top_n = 10);

} // namespace dm

#endif
