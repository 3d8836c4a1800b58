#include "dm/manager.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dm/error.hpp"

namespace dm {

namespace {

using json = nlohmann::ordered_json;

json schema_json(const SlotSchema& schema) {
    json j;
    j["name"] = schema.name;
    j["slots"] = schema.slots;
    j["system_acts"] = schema.system_acts;
    return j;
}

SlotSchema schema_from(const json& j) {
    SlotSchema schema;
    schema.name = j.at("name").get<std::string>();
    schema.slots = j.at("slots").get<std::vector<std::string>>();
    schema.system_acts = j.at("system_acts").get<std::vector<std::string>>();
    schema.check();
    return schema;
}

} // namespace

void LoadedPolicy::check() const {
    try {
        params.check();
    } catch (const std::exception& e) {
        throw DataError(std::string("policy artifact: ") + e.what());
    }
    const std::size_t width = encoder.input_width();
    if (params.spec.input_dim != static_cast<int>(width))
        throw DataError("policy artifact: network input width " +
                        std::to_string(params.spec.input_dim) +
                        " does not match the encoder window width " +
                        std::to_string(width));
    if (params.spec.output_dim != static_cast<int>(encoder.schema.system_acts.size()))
        throw DataError("policy artifact: output width does not match the act inventory");
    if (normalizer.mean.size() != width || normalizer.scale.size() != width)
        throw DataError("policy artifact: normalizer width does not match the encoder");
    if (priors && priors->size() != encoder.schema.system_acts.size())
        throw DataError("policy artifact: prior support does not match the act inventory");
}

std::string policy_to_json(const LoadedPolicy& policy) {
    policy.check();
    json j;
    j["format"] = "dmmodel/1";
    j["spec"] = {{"input_dim", policy.params.spec.input_dim},
                 {"hidden", policy.params.spec.hidden},
                 {"output_dim", policy.params.spec.output_dim}};
    json weights = json::array();
    for (const kernels::Matrix& w : policy.params.weights) {
        json layer = json::array();
        for (std::size_t r = 0; r < w.rows; ++r)
            layer.push_back(std::vector<double>(w.row(r), w.row(r) + w.cols));
        weights.push_back(std::move(layer));
    }
    j["weights"] = std::move(weights);
    j["biases"] = policy.params.biases;
    j["activation"] = to_string(policy.params.spec.activation);
    j["normalizer"] = {{"mean", policy.normalizer.mean},
                       {"scale", policy.normalizer.scale}};
    j["encoder"] = {{"mode", to_string(policy.encoder.mode)},
                    {"threshold", policy.encoder.threshold},
                    {"context", policy.encoder.context},
                    {"include_prev_act", policy.encoder.include_prev_act},
                    {"schema", schema_json(policy.encoder.schema)}};
    if (policy.priors) {
        json priors;
        for (std::size_t a = 0; a < policy.priors->size(); ++a)
            priors[policy.encoder.schema.system_acts[a]] = (*policy.priors)[a];
        j["priors"] = std::move(priors);
        j["prior_scaling"] =
            policy.scaling == PriorScaling::Divide ? "divide" : "multiply";
    }
    return j.dump();
}

LoadedPolicy policy_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model artifact: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "dmmodel/1")
            throw DataError("model artifact: unsupported format '" +
                            j.at("format").get<std::string>() + "'");
        LoadedPolicy policy;
        policy.params.spec.input_dim = j.at("spec").at("input_dim").get<int>();
        policy.params.spec.hidden = j.at("spec").at("hidden").get<std::vector<int>>();
        policy.params.spec.output_dim = j.at("spec").at("output_dim").get<int>();
        policy.params.spec.activation =
            activation_from_string(j.at("activation").get<std::string>());
        for (const json& layer : j.at("weights")) {
            auto rows = layer.get<std::vector<std::vector<double>>>();
            if (rows.empty() || rows.front().empty())
                throw DataError("model artifact: empty weight matrix");
            kernels::Matrix w(rows.size(), rows.front().size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (rows[r].size() != w.cols)
                    throw DataError("model artifact: ragged weight matrix");
                std::copy(rows[r].begin(), rows[r].end(), w.row(r));
            }
            policy.params.weights.push_back(std::move(w));
        }
        policy.params.biases =
            j.at("biases").get<std::vector<std::vector<double>>>();
        policy.normalizer.mean =
            j.at("normalizer").at("mean").get<std::vector<double>>();
        policy.normalizer.scale =
            j.at("normalizer").at("scale").get<std::vector<double>>();
        const json& enc = j.at("encoder");
        policy.encoder.mode = feature_mode_from_string(enc.at("mode").get<std::string>());
        policy.encoder.threshold = enc.at("threshold").get<double>();
        policy.encoder.context = enc.at("context").get<int>();
        policy.encoder.include_prev_act = enc.at("include_prev_act").get<bool>();
        policy.encoder.schema = schema_from(enc.at("schema"));
        if (j.contains("priors")) {
            std::vector<double> priors;
            for (const std::string& act : policy.encoder.schema.system_acts) {
                if (!j["priors"].contains(act))
                    throw DataError("model artifact: missing prior for act '" + act + "'");
                priors.push_back(j["priors"][act].get<double>());
            }
            policy.priors = std::move(priors);
            if (j.contains("prior_scaling") &&
                j.at("prior_scaling").get<std::string>() == "multiply")
                policy.scaling = PriorScaling::Multiply;
        }
        policy.check();
        return policy;
    } catch (const json::exception& e) {
        throw DataError(std::string("model artifact: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("model artifact: ") + e.what());
    }
}

void save_policy(const LoadedPolicy& policy, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out << policy_to_json(policy) << "\n";
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

LoadedPolicy load_policy(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model artifact '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return policy_from_json(text.str());
}

Session::Session(const LoadedPolicy& policy)
    : policy_(&policy), register_(DialogRegister::initial(policy.encoder.schema)) {
    policy.check();
}

std::pair<std::string, std::vector<double>> Session::step(const UserObservation& obs) {
    const EncoderConfig& enc = policy_->encoder;
    for (const auto& [slot, conf] : obs.slot_values) {
        if (!enc.schema.slot_index(slot))
            throw DataError("unknown slot '" + slot + "'");
        if (!(conf >= 0.0 && conf <= 1.0))
            throw DataError("confidence for '" + slot + "' outside [0,1]");
    }

    DialogRegister next = update_register(register_, obs, enc.threshold, enc.schema);
    next.prev_act = last_act_;
    std::vector<double> vec = enc.mode == FeatureMode::DialogRegister
                                  ? encode_turn(next, enc)
                                  : encode_turn(derive_changes(register_, next), enc);
    history_.push_back(std::move(vec));

    std::vector<double> window = build_window(history_, enc.context);
    std::vector<double> x = normalize(window, policy_->normalizer);
    auto [act_index, probs] = predict(policy_->params, x);
    if (policy_->priors) {
        probs = rescale_by_priors(probs, *policy_->priors, policy_->scaling);
        act_index = argmax_lowest(probs);
    }

    register_ = std::move(next);
    last_act_ = act_index;
    ++turns_;
    return {enc.schema.system_acts[static_cast<std::size_t>(act_index)], probs};
}

void Session::force_last_act(const std::string& act) {
    auto idx = policy_->encoder.schema.act_index(act);
    if (!idx) throw DataError("unknown system act '" + act + "'");
    last_act_ = static_cast<int>(*idx);
}

void Session::reset() {
    register_ = DialogRegister::initial(policy_->encoder.schema);
    history_.clear();
    last_act_.reset();
    turns_ = 0;
}

} // namespace dm
