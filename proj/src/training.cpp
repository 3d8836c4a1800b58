#include "dm/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dm/error.hpp"
#include "dm/evaluation.hpp"
#include "dm/rng.hpp"

namespace dm {

namespace {

// Sub-seed stream tags; arbitrary but fixed so runs stay reproducible.
constexpr std::uint64_t kInitStream = 0xA0;
constexpr std::uint64_t kShuffleStream = 0xB000;
constexpr std::uint64_t kDropoutStream = 0xC000;

double validation_er(const NetworkParams& params, const FeatureDataset& validation) {
    std::vector<int> predicted = predict_batch(params, validation.inputs);
    return error_rate(predicted, validation.labels);
}

DropoutMasks make_masks(Rng& rng, const std::vector<int>& hidden, std::size_t batch,
                        double rate) {
    DropoutMasks masks;
    const double keep = 1.0 - rate;
    for (int width : hidden) {
        kernels::Matrix m(batch, static_cast<std::size_t>(width));
        for (double& v : m.data)
            v = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
        masks.push_back(std::move(m));
    }
    return masks;
}

} // namespace

std::string to_string(const BatchStrategy& b) {
    switch (b.kind) {
        case BatchStrategy::Kind::PerSample: return "per_sample";
        case BatchStrategy::Kind::PerEpoch: return "per_epoch";
        case BatchStrategy::Kind::MiniBatch: return std::to_string(b.size);
    }
    throw std::logic_error("unknown batch strategy");
}

BatchStrategy batch_strategy_from_string(const std::string& s) {
    if (s == "per_sample") return BatchStrategy::per_sample();
    if (s == "per_epoch") return BatchStrategy::per_epoch();
    try {
        std::size_t used = 0;
        int n = std::stoi(s, &used);
        if (used == s.size() && n >= 1) return BatchStrategy::minibatch(n);
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("batch must be per_sample, per_epoch, or a positive size");
}

void Hyperparams::check() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
    if (dropout < 0.0 || dropout >= 1.0)
        throw std::invalid_argument("dropout must be in [0,1)");
    if (batch.kind == BatchStrategy::Kind::MiniBatch && batch.size < 1)
        throw std::invalid_argument("minibatch size must be >= 1");
    for (int w : hidden)
        if (w < 1) throw std::invalid_argument("hidden width must be >= 1");
}

Hyperparams baseline_hyperparams() {
    Hyperparams hp;
    hp.hidden = {100, 10};
    hp.activation = ActivationKind::Sigmoid;
    hp.lr = 0.5;
    hp.batch = BatchStrategy::minibatch(8);
    hp.epochs = 50;
    hp.dropout = 0.0;
    return hp;
}

Hyperparams tuned_hyperparams() {
    Hyperparams hp;
    hp.hidden = {64, 64, 64, 64};
    hp.activation = ActivationKind::Tanh;
    hp.lr = 0.01;
    hp.batch = BatchStrategy::minibatch(8);
    hp.epochs = 50;
    hp.dropout = 0.0;
    return hp;
}

std::vector<int> checkpoint_epochs(int epochs) {
    static const int schedule[] = {5, 10, 15, 25, 50, 75, 100};
    std::vector<int> out;
    for (int e : schedule)
        if (e <= epochs) out.push_back(e);
    if (out.empty()) out.push_back(epochs);
    return out;
}

// Exploded weights can keep producing finite clamped losses (relu flushes
// NaN pre-activations to zero), so divergence needs a parameter check too.
bool params_finite(const NetworkParams& params) {
    for (const kernels::Matrix& w : params.weights)
        for (double v : w.data)
            if (!std::isfinite(v)) return false;
    for (const std::vector<double>& b : params.biases)
        for (double v : b)
            if (!std::isfinite(v)) return false;
    return true;
}

std::pair<NetworkParams, TrainReport> train(const FeatureDataset& dataset,
                                            const Hyperparams& hp,
                                            const FeatureDataset* validation) {
    hp.check();
    if (dataset.size() == 0) throw std::invalid_argument("empty training dataset");

    const std::size_t n = dataset.size();
    const std::size_t dim = dataset.inputs.front().size();
    const int k = static_cast<int>(dataset.encoder.schema.system_acts.size());
    for (int label : dataset.labels)
        if (label < 0 || label >= k)
            throw std::invalid_argument("label outside the act inventory");

    NetworkSpec spec;
    spec.input_dim = static_cast<int>(dim);
    spec.hidden = hp.hidden;
    spec.activation = hp.activation;
    spec.output_dim = k;
    NetworkParams params = init_network(spec, Rng::mix(hp.seed, kInitStream));

    const std::vector<int> checkpoints = checkpoint_epochs(hp.epochs);
    TrainReport report;
    NetworkParams best_params = params;
    double best_er = std::numeric_limits<double>::infinity();
    int best_epoch = 0;

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
        Rng shuffle_rng(Rng::mix(hp.seed, kShuffleStream + static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);
        Rng dropout_rng(Rng::mix(hp.seed, kDropoutStream + static_cast<std::uint64_t>(epoch)));

        std::size_t chunk = n;
        if (hp.batch.kind == BatchStrategy::Kind::PerSample) chunk = 1;
        else if (hp.batch.kind == BatchStrategy::Kind::MiniBatch)
            chunk = static_cast<std::size_t>(hp.batch.size);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += chunk) {
            const std::size_t size = std::min(chunk, n - start);
            kernels::Matrix x(size, dim);
            std::vector<int> targets(size);
            for (std::size_t s = 0; s < size; ++s) {
                const std::size_t idx = order[start + s];
                std::copy(dataset.inputs[idx].begin(), dataset.inputs[idx].end(), x.row(s));
                targets[s] = dataset.labels[idx];
            }
            GradientSet grads;
            if (hp.dropout > 0.0 && !hp.hidden.empty()) {
                DropoutMasks masks = make_masks(dropout_rng, hp.hidden, size, hp.dropout);
                grads = gradients(params, x, targets, &masks);
            } else {
                grads = gradients(params, x, targets);
            }
            if (!std::isfinite(grads.loss)) {
                std::ostringstream msg;
                msg << "training diverged at epoch " << epoch << " (non-finite loss)";
                throw RuntimeFailure(msg.str());
            }
            loss_sum += grads.loss * static_cast<double>(size);
            apply_update(params, grads, hp.lr);
        }
        report.epoch_loss.push_back(loss_sum / static_cast<double>(n));
        if (!params_finite(params)) {
            std::ostringstream msg;
            msg << "training diverged at epoch " << epoch << " (non-finite parameters)";
            throw RuntimeFailure(msg.str());
        }

        if (std::binary_search(checkpoints.begin(), checkpoints.end(), epoch)) {
            if (validation) {
                double er = validation_er(params, *validation);
                report.checkpoints.push_back({epoch, er});
                if (er < best_er) {
                    best_er = er;
                    best_params = params;
                    best_epoch = epoch;
                }
            }
        }
    }

    const auto t1 = std::chrono::steady_clock::now();
    report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

    if (validation) {
        report.selected_epoch = best_epoch;
        return {std::move(best_params), std::move(report)};
    }
    report.selected_epoch = hp.epochs;
    return {std::move(params), std::move(report)};
}

std::size_t SweepGrid::entry_count() const {
    return depths.size() * widths.size() * activations.size() * lrs.size() *
           batches.size() * epochs.size() * dropouts.size();
}

Hyperparams SweepGrid::entry(std::size_t i) const {
    if (entry_count() == 0) throw std::invalid_argument("empty sweep grid");
    if (i >= entry_count()) throw std::invalid_argument("sweep index out of range");
    auto pick = [&i](const auto& axis) {
        std::size_t idx = i % axis.size();
        i /= axis.size();
        return axis[idx];
    };
    // consume fastest-varying axes first
    Hyperparams hp;
    hp.dropout = pick(dropouts);
    hp.epochs = pick(epochs);
    hp.batch = pick(batches);
    hp.lr = pick(lrs);
    hp.activation = pick(activations);
    int width = pick(widths);
    int depth = pick(depths);
    hp.hidden.assign(static_cast<std::size_t>(depth), width);
    return hp;
}

SweepGrid paper_grid(std::uint64_t seed) {
    SweepGrid grid;
    grid.depths = {0, 1, 2, 3, 4, 5, 6};
    grid.widths = {8, 16, 32, 64, 128, 256, 512, 1024};
    grid.activations = {ActivationKind::Sigmoid, ActivationKind::Tanh,
                        ActivationKind::Relu};
    grid.lrs = {0.5};
    grid.batches = {BatchStrategy::minibatch(8)};
    grid.epochs = {100};
    grid.dropouts = {0.0};
    grid.seed = seed;
    return grid;
}

SweepReport sweep(const FeatureDataset& dataset, const SweepGrid& grid,
                  const FeatureDataset& validation, int jobs) {
    const std::size_t count = grid.entry_count();
    if (count == 0) throw std::invalid_argument("empty sweep grid");
    if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<SweepEntry> entries(count);
    std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic) num_threads(jobs) if (jobs > 1)
    for (long i = 0; i < static_cast<long>(count); ++i) {
        try {
            const auto idx = static_cast<std::size_t>(i);
            Hyperparams hp = grid.entry(idx);
            hp.seed = Rng::mix(grid.seed, idx);
            auto [params, report] = train(dataset, hp, &validation);
            SweepEntry entry;
            entry.hp = hp;
            entry.index = idx;
            entry.param_count = params.parameter_count();
            entry.selected_epoch = report.selected_epoch;
            entry.val_er_percent = validation_er(params, validation);
            entries[idx] = std::move(entry);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::stable_sort(entries.begin(), entries.end(),
                     [](const SweepEntry& a, const SweepEntry& b) {
                         if (a.val_er_percent != b.val_er_percent)
                             return a.val_er_percent < b.val_er_percent;
                         if (a.param_count != b.param_count)
                             return a.param_count < b.param_count;
                         return a.index < b.index;
                     });

    SweepReport report;
    report.entries = std::move(entries);
    const auto t1 = std::chrono::steady_clock::now();
    report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    return report;
}

std::string render_sweep(const SweepReport& report, std::size_t top_n) {
    std::ostringstream out;
    out << "rank,hidden,activation,lr,batch,epochs,dropout,selected_epoch,params,val_er_percent\n";
    const std::size_t limit = std::min(top_n, report.entries.size());
    for (std::size_t r = 0; r < limit; ++r) {
        const SweepEntry& e = report.entries[r];
        out << (r + 1) << ",";
        if (e.hp.hidden.empty()) {
            out << "none";
        } else {
            for (std::size_t l = 0; l < e.hp.hidden.size(); ++l)
                out << (l ? "x" : "") << e.hp.hidden[l];
        }
        out << "," << to_string(e.hp.activation) << "," << e.hp.lr << ","
            << to_string(e.hp.batch) << "," << e.hp.epochs << "," << e.hp.dropout
            << "," << e.selected_epoch << "," << e.param_count << ",";
        std::ostringstream er;
        er.setf(std::ios::fixed);
        er.precision(1);
        er << e.val_er_percent;
        out << er.str() << "\n";
    }
    return out.str();
}

} // namespace dm
