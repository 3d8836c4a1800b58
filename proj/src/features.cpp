#include "dm/features.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "dm/error.hpp"

namespace dm {

std::string to_string(FeatureMode mode) {
    return mode == FeatureMode::DialogRegister ? "dr" : "dch";
}

FeatureMode feature_mode_from_string(const std::string& s) {
    if (s == "dr") return FeatureMode::DialogRegister;
    if (s == "dch") return FeatureMode::DialogChanges;
    throw std::invalid_argument("unknown feature mode '" + s + "' (expected dr or dch)");
}

DialogRegister update_register(const DialogRegister& prev, const UserObservation& obs,
                               double threshold, const SlotSchema& schema) {
    if (prev.codes.size() != schema.slots.size())
        throw std::invalid_argument("update_register: register width does not match schema");
    DialogRegister out = prev;
    for (const auto& [slot, conf] : obs.slot_values) {
        auto idx = schema.slot_index(slot);
        if (!idx) throw DataError("update_register: unknown slot '" + slot + "'");
        out.codes[*idx] = conf > threshold ? 1 : 2;
    }
    return out;
}

DialogChanges derive_changes(const DialogRegister& prev_dr, const DialogRegister& new_dr) {
    if (prev_dr.codes.size() != new_dr.codes.size())
        throw std::invalid_argument("derive_changes: register widths differ");
    DialogChanges out;
    out.codes.resize(new_dr.codes.size());
    out.prev_act = new_dr.prev_act;
    for (std::size_t i = 0; i < new_dr.codes.size(); ++i) {
        const int from = prev_dr.codes[i];
        const int to = new_dr.codes[i];
        int code = 0;
        if (from != to) {
            if (to == 1) code = from == 2 ? 4 : 1; // low->high is its own code
            else code = 2;                         // provided with low confidence
        }
        out.codes[i] = code;
    }
    return out;
}

static std::vector<double> encode_codes(const std::vector<int>& codes,
                                        std::optional<int> prev_act,
                                        const EncoderConfig& config) {
    if (codes.size() != config.schema.slots.size())
        throw std::invalid_argument("encode_turn: state width does not match schema");
    std::vector<double> v;
    v.reserve(config.turn_width());
    for (int c : codes) v.push_back(static_cast<double>(c));
    if (config.include_prev_act)
        v.push_back(prev_act ? static_cast<double>(*prev_act) : -1.0);
    return v;
}

std::vector<double> encode_turn(const DialogRegister& state, const EncoderConfig& config) {
    if (config.mode != FeatureMode::DialogRegister)
        throw std::invalid_argument("encode_turn: register passed to a dch encoder");
    return encode_codes(state.codes, state.prev_act, config);
}

std::vector<double> encode_turn(const DialogChanges& state, const EncoderConfig& config) {
    if (config.mode != FeatureMode::DialogChanges)
        throw std::invalid_argument("encode_turn: changes passed to a dr encoder");
    return encode_codes(state.codes, state.prev_act, config);
}

std::vector<double> build_window(const std::vector<std::vector<double>>& history,
                                 int context) {
    if (history.empty())
        throw std::invalid_argument("build_window: history is empty");
    const std::size_t width = history.back().size();
    for (const auto& v : history)
        if (v.size() != width)
            throw std::invalid_argument("build_window: inconsistent turn-vector widths");

    std::vector<double> out;
    out.reserve(width * static_cast<std::size_t>(context + 1));
    const long current = static_cast<long>(history.size()) - 1;
    for (long t = current - context; t <= current; ++t) {
        if (t < 0) {
            out.insert(out.end(), width, 0.0);
        } else {
            const auto& v = history[static_cast<std::size_t>(t)];
            out.insert(out.end(), v.begin(), v.end());
        }
    }
    return out;
}

Normalizer fit_normalizer(const std::vector<std::vector<double>>& train_inputs) {
    if (train_inputs.empty())
        throw std::invalid_argument("fit_normalizer: no inputs");
    const std::size_t width = train_inputs.front().size();
    const double n = static_cast<double>(train_inputs.size());

    Normalizer norm;
    norm.mean.assign(width, 0.0);
    norm.scale.assign(width, 0.0);
    for (const auto& v : train_inputs) {
        if (v.size() != width)
            throw std::invalid_argument("fit_normalizer: inconsistent input widths");
        for (std::size_t d = 0; d < width; ++d) norm.mean[d] += v[d];
    }
    for (std::size_t d = 0; d < width; ++d) norm.mean[d] /= n;
    for (const auto& v : train_inputs)
        for (std::size_t d = 0; d < width; ++d) {
            const double c = v[d] - norm.mean[d];
            norm.scale[d] += c * c;
        }
    for (std::size_t d = 0; d < width; ++d) {
        double sd = std::sqrt(norm.scale[d] / n);
        norm.scale[d] = sd < 1e-12 ? 1.0 : sd; // constant dimensions pass through
    }
    return norm;
}

std::vector<double> normalize(const std::vector<double>& v, const Normalizer& norm) {
    if (v.size() != norm.mean.size())
        throw std::invalid_argument("normalize: width mismatch");
    std::vector<double> out(v.size());
    for (std::size_t d = 0; d < v.size(); ++d)
        out[d] = (v[d] - norm.mean[d]) / norm.scale[d];
    return out;
}

FeatureDataset build_dataset(const DialogCorpus& corpus, const EncoderConfig& config) {
    FeatureDataset ds;
    ds.encoder = config;
    for (const auto& dialog : corpus.dialogs) {
        DialogRegister reg = DialogRegister::initial(config.schema);
        std::optional<int> prev_act;
        std::vector<std::vector<double>> turn_vectors;
        for (const auto& turn : dialog.turns) {
            DialogRegister next = update_register(reg, turn.user, config.threshold,
                                                  config.schema);
            next.prev_act = prev_act;
            std::vector<double> vec;
            if (config.mode == FeatureMode::DialogRegister)
                vec = encode_turn(next, config);
            else
                vec = encode_turn(derive_changes(reg, next), config);
            turn_vectors.push_back(std::move(vec));

            auto act = config.schema.act_index(turn.system_act);
            if (!act)
                throw DataError("build_dataset: dialog '" + dialog.id +
                                "': unknown system act '" + turn.system_act + "'");
            ds.inputs.push_back(build_window(turn_vectors, config.context));
            ds.labels.push_back(static_cast<int>(*act));

            reg = std::move(next);
            prev_act = static_cast<int>(*act); // gold act feeds the next turn
        }
    }
    return ds;
}

void apply_normalizer(FeatureDataset& dataset, const Normalizer& norm) {
    for (auto& v : dataset.inputs) v = normalize(v, norm);
    dataset.normalizer = norm;
}

std::string dataset_to_csv(const FeatureDataset& dataset) {
    std::string out;
    const std::size_t width = dataset.inputs.empty() ? dataset.encoder.input_width()
                                                     : dataset.inputs.front().size();
    for (std::size_t d = 0; d < width; ++d) {
        out += "f" + std::to_string(d) + ",";
    }
    out += "label\n";
    char buf[64];
    for (std::size_t i = 0; i < dataset.inputs.size(); ++i) {
        for (double x : dataset.inputs[i]) {
            std::snprintf(buf, sizeof buf, "%.17g", x);
            out += buf;
            out += ',';
        }
        out += std::to_string(dataset.labels[i]);
        out += '\n';
    }
    return out;
}

} // namespace dm
