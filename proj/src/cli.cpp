#include "dm/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "dm/config.hpp"
#include "dm/error.hpp"
#include "dm/evaluation.hpp"
#include "dm/manager.hpp"
#include "dm/rng.hpp"
#include "dm/synthetic.hpp"

namespace dm::cli {

namespace {

constexpr std::uint64_t kCliCarveStream = 500;

struct OutputSink {
    std::ostream* stream;
    std::ofstream file;

    OutputSink(const std::string& path, std::ostream& fallback) {
        if (path.empty()) {
            stream = &fallback;
        } else {
            file.open(path);
            if (!file) throw DataError("cannot open '" + path + "' for writing");
            stream = &file;
        }
    }
};

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

EncoderConfig make_encoder(const SlotSchema& schema, const std::string& mode,
                           int context, double threshold, bool prev_act) {
    EncoderConfig encoder;
    encoder.mode = feature_mode_from_string(mode);
    encoder.context = context;
    encoder.threshold = threshold;
    encoder.include_prev_act = prev_act;
    encoder.schema = schema;
    return encoder;
}

// Sets aside ~10% of the dialogs (seeded, at least one) for checkpoint
// selection; both halves keep corpus order.
void carve_validation(const DialogCorpus& corpus, std::uint64_t seed,
                      DialogCorpus& train_out, DialogCorpus& val_out) {
    std::vector<std::string> ids;
    for (const Dialog& d : corpus.dialogs) ids.push_back(d.id);
    std::vector<std::string> shuffled = ids;
    Rng rng(Rng::mix(seed, kCliCarveStream));
    rng.shuffle(shuffled);
    std::size_t val_n = ids.size() >= 2 ? std::max<std::size_t>(1, ids.size() / 10) : 0;
    std::vector<std::string> val_ids(shuffled.begin(),
                                     shuffled.begin() + static_cast<long>(val_n));
    std::sort(val_ids.begin(), val_ids.end());
    std::vector<std::string> train_ids;
    for (const std::string& id : ids)
        if (!std::binary_search(val_ids.begin(), val_ids.end(), id))
            train_ids.push_back(id);
    train_out = subset_by_ids(corpus, train_ids);
    val_out = subset_by_ids(corpus, val_ids);
}

std::vector<std::string> corpus_labels(const DialogCorpus& corpus) {
    std::vector<std::string> labels;
    for (const Dialog& d : corpus.dialogs)
        for (const Turn& t : d.turns) labels.push_back(t.system_act);
    return labels;
}

std::vector<double> prior_vector(const DialogCorpus& train_corpus) {
    std::map<std::string, double> priors =
        class_priors(corpus_labels(train_corpus), train_corpus.schema, 1.0);
    std::vector<double> vec;
    for (const std::string& act : train_corpus.schema.system_acts)
        vec.push_back(priors.at(act));
    return vec;
}

template <class T>
void apply_single(const std::vector<T>& values, const char* key, bool flag_given,
                  T& target) {
    if (values.empty() || flag_given) return;
    if (values.size() > 1)
        throw DataError(std::string("config key '") + key +
                        "' lists several values; only sweep accepts lists");
    target = values.front();
}

struct GenArgs {
    std::string preset;
    std::size_t n = 0;
    bool n_given = false;
    double noise = -1.0; // <0 keeps the preset default
    std::uint64_t seed = 0;
    std::string out_path;
};

int run_gen(const GenArgs& a, std::ostream& err) {
    SyntheticConfig cfg;
    std::size_t n = a.n;
    if (!a.n_given) {
        if (a.preset == "demo") n = 2000;
        else if (a.preset == "uniform") n = 50;
        else if (a.preset == "dihana-like") n = 713;
        else if (a.preset == "letsgo-like") n = 235;
        else n = 10415;
    }
    if (a.preset == "demo") cfg = demo_config(n, 0.2, a.seed);
    else if (a.preset == "uniform") cfg = uniform_config(n, a.seed);
    else if (a.preset == "dihana-like") cfg = dihana_like_config(n, a.seed);
    else if (a.preset == "letsgo-like") cfg = letsgo_like_config(n, a.seed);
    else cfg = dstc_like_config(n, a.seed);
    if (a.noise >= 0.0) cfg.confidence_noise = a.noise;

    DialogCorpus corpus = generate_synthetic(cfg);
    save_corpus(corpus, a.out_path);
    err << "# wrote " << corpus.dialogs.size() << " dialogs, " << corpus.total_turns()
        << " turns to " << a.out_path << "\n";
    return 0;
}

struct EncodeArgs {
    std::string corpus_path;
    std::string mode = "dr";
    int context = 0;
    double threshold = 0.5;
    std::string prev_act = "off";
    std::string out_path;
};

int run_encode(const EncodeArgs& a, std::ostream& out) {
    DialogCorpus corpus = load_corpus(a.corpus_path);
    EncoderConfig encoder = make_encoder(corpus.schema, a.mode, a.context, a.threshold,
                                         a.prev_act == "on");
    FeatureDataset ds = build_dataset(corpus, encoder);
    OutputSink sink(a.out_path, out);
    *sink.stream << dataset_to_csv(ds);
    return 0;
}

struct TrainArgs {
    std::string corpus_path;
    std::string mode = "dr";
    int context = 0;
    double threshold = 0.5;
    std::string prev_act = "off";
    std::string preset = "baseline";
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_path;
    std::string balance = "off";
    std::string prior_scaling = "divide";
    bool mode_given = false, context_given = false, threshold_given = false,
         prev_given = false;
};

Hyperparams merge_hyperparams(const std::string& preset, const FileConfig& cfg) {
    Hyperparams hp = preset == "tuned" ? tuned_hyperparams() : baseline_hyperparams();
    if (!cfg.hidden_layers.empty() || !cfg.width.empty()) {
        if (cfg.hidden_layers.size() != 1)
            throw DataError("config: hidden_layers lists several values; use sweep");
        int depth = cfg.hidden_layers.front();
        if (depth > 0 && cfg.width.empty())
            throw DataError("config: width is required when hidden_layers > 0");
        if (depth > 0 && cfg.width.size() != 1)
            throw DataError("config: width lists several values; use sweep");
        hp.hidden.assign(static_cast<std::size_t>(depth),
                         depth > 0 ? cfg.width.front() : 0);
    }
    if (!cfg.activation.empty()) {
        if (cfg.activation.size() > 1)
            throw DataError("config: activation lists several values; use sweep");
        hp.activation = activation_from_string(cfg.activation.front());
    }
    if (!cfg.lr.empty()) {
        if (cfg.lr.size() > 1) throw DataError("config: lr lists several values; use sweep");
        hp.lr = cfg.lr.front();
    }
    if (!cfg.batch.empty()) {
        if (cfg.batch.size() > 1)
            throw DataError("config: batch lists several values; use sweep");
        hp.batch = batch_strategy_from_string(cfg.batch.front());
    }
    if (!cfg.epochs.empty()) {
        if (cfg.epochs.size() > 1)
            throw DataError("config: epochs lists several values; use sweep");
        hp.epochs = cfg.epochs.front();
    }
    if (!cfg.dropout.empty()) {
        if (cfg.dropout.size() > 1)
            throw DataError("config: dropout lists several values; use sweep");
        hp.dropout = cfg.dropout.front();
    }
    return hp;
}

void merge_encoder_flags(const FileConfig& cfg, bool mode_given, bool context_given,
                         bool threshold_given, bool prev_given, std::string& mode,
                         int& context, double& threshold, std::string& prev_act) {
    apply_single(cfg.mode, "mode", mode_given, mode);
    apply_single(cfg.context, "context", context_given, context);
    apply_single(cfg.threshold, "threshold", threshold_given, threshold);
    if (!cfg.include_prev_act.empty() && !prev_given) {
        if (cfg.include_prev_act.size() > 1)
            throw DataError("config key 'include_prev_act' lists several values");
        prev_act = cfg.include_prev_act.front() ? "on" : "off";
    }
}

std::uint64_t resolve_seed(bool flag_given, std::uint64_t flag_value,
                           const FileConfig& cfg, std::ostream& err) {
    if (flag_given) return flag_value;
    if (cfg.seed) return *cfg.seed;
    err << "error: --seed is required (flag or config file)\n";
    throw CLI::RuntimeError(1);
}

int run_train(const TrainArgs& a, std::ostream& err) {
    FileConfig cfg;
    if (!a.config_path.empty()) cfg = load_config(a.config_path);
    std::string mode = a.mode;
    int context = a.context;
    double threshold = a.threshold;
    std::string prev_act = a.prev_act;
    merge_encoder_flags(cfg, a.mode_given, a.context_given, a.threshold_given,
                        a.prev_given, mode, context, threshold, prev_act);
    if (context < 0 || context > 3) throw DataError("context must be in 0..3");
    std::uint64_t seed = resolve_seed(a.seed_given, a.seed, cfg, err);

    Hyperparams hp = merge_hyperparams(a.preset, cfg);
    hp.seed = seed;

    DialogCorpus corpus = load_corpus(a.corpus_path);
    EncoderConfig encoder =
        make_encoder(corpus.schema, mode, context, threshold, prev_act == "on");

    DialogCorpus train_corpus, val_corpus;
    carve_validation(corpus, seed, train_corpus, val_corpus);
    FeatureDataset train_ds = build_dataset(train_corpus, encoder);
    Normalizer norm = fit_normalizer(train_ds.inputs);
    apply_normalizer(train_ds, norm);

    FeatureDataset val_ds;
    const FeatureDataset* val_ptr = nullptr;
    if (!val_corpus.dialogs.empty()) {
        val_ds = build_dataset(val_corpus, encoder);
        apply_normalizer(val_ds, norm);
        val_ptr = &val_ds;
    }

    auto [params, report] = train(train_ds, hp, val_ptr);

    LoadedPolicy policy;
    policy.params = std::move(params);
    policy.normalizer = std::move(norm);
    policy.encoder = encoder;
    policy.scaling = a.prior_scaling == "multiply" ? PriorScaling::Multiply
                                                   : PriorScaling::Divide;
    if (a.balance == "on") policy.priors = prior_vector(train_corpus);
    save_policy(policy, a.out_path);

    if (!report.checkpoints.empty()) {
        double best = 0.0;
        for (const auto& c : report.checkpoints)
            if (c.epoch == report.selected_epoch) best = c.val_er_percent;
        char er[32];
        std::snprintf(er, sizeof er, "%.1f", best);
        err << "# selected epoch " << report.selected_epoch << " (validation ER " << er
            << ")\n";
    } else {
        err << "# trained " << report.selected_epoch << " epochs\n";
    }
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.2f", report.wall_seconds);
    err << "# wall " << wall << "s\n";
    err << "# model written to " << a.out_path << "\n";
    return 0;
}

struct EvalArgs {
    std::string corpus_path;
    std::string mode = "dr";
    std::string context = "0";
    double threshold = 0.5;
    std::string prev_act = "off";
    std::string preset = "baseline";
    std::string config_path;
    int k = 5;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string balance = "off";
    std::string format = "text";
    int jobs = 1;
    std::string out_path;
    std::string confusion_path;
    std::string prior_scaling = "divide";
    bool mode_given = false, context_given = false, threshold_given = false,
         prev_given = false;
};

int run_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    FileConfig cfg;
    if (!a.config_path.empty()) cfg = load_config(a.config_path);
    std::string mode = a.mode;
    std::string context = a.context;
    double threshold = a.threshold;
    std::string prev_act = a.prev_act;
    // context arrives as text because of the "all" grid value
    if (!cfg.context.empty() && !a.context_given) {
        if (cfg.context.size() > 1)
            throw DataError("config key 'context' lists several values");
        context = std::to_string(cfg.context.front());
    }
    apply_single(cfg.mode, "mode", a.mode_given, mode);
    apply_single(cfg.threshold, "threshold", a.threshold_given, threshold);
    if (!cfg.include_prev_act.empty() && !a.prev_given)
        prev_act = cfg.include_prev_act.front() ? "on" : "off";
    std::uint64_t seed = resolve_seed(a.seed_given, a.seed, cfg, err);

    Hyperparams hp = merge_hyperparams(a.preset, cfg);

    std::vector<std::string> modes =
        mode == "both" ? std::vector<std::string>{"dr", "dch"}
                       : std::vector<std::string>{mode};
    std::vector<int> contexts;
    if (context == "all") contexts = {0, 1, 2, 3};
    else contexts = {std::stoi(context)};

    DialogCorpus corpus = load_corpus(a.corpus_path);
    CrossValidationOptions opts;
    opts.k = a.k;
    opts.seed = seed;
    opts.balance = a.balance == "on";
    opts.scaling = a.prior_scaling == "multiply" ? PriorScaling::Multiply
                                                 : PriorScaling::Divide;
    opts.jobs = a.jobs;

    std::vector<GridCell> cells;
    double wall = 0.0;
    for (int ctx : contexts)
        for (const std::string& m : modes) {
            EncoderConfig encoder =
                make_encoder(corpus.schema, m, ctx, threshold, prev_act == "on");
            GridCell cell;
            cell.context = ctx;
            cell.mode = encoder.mode;
            auto t0 = std::chrono::steady_clock::now();
            cell.report = cross_validate(corpus, encoder, hp, opts);
            auto t1 = std::chrono::steady_clock::now();
            wall += std::chrono::duration<double>(t1 - t0).count();
            cells.push_back(std::move(cell));
        }

    ReportFormat format = report_format_from_string(a.format);
    OutputSink sink(a.out_path, out);
    if (cells.size() == 1) {
        *sink.stream << render_report(cells.front().report, format);
        if (!a.confusion_path.empty()) {
            std::ofstream cm(a.confusion_path);
            if (!cm)
                throw DataError("cannot open '" + a.confusion_path + "' for writing");
            cm << confusion_csv(cells.front().report);
        }
    } else {
        if (!a.confusion_path.empty())
            throw DataError("--confusion needs a single mode and context");
        *sink.stream << render_grid(cells, format);
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", wall);
    err << "# wall " << buf << "s\n";
    return 0;
}

struct SweepArgs {
    std::string corpus_path;
    std::string mode = "dr";
    int context = 0;
    double threshold = 0.5;
    std::string prev_act = "off";
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int jobs = 1;
    std::string out_path;
    std::size_t top = 10;
    bool mode_given = false, context_given = false, threshold_given = false,
         prev_given = false;
};

int run_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
    FileConfig cfg;
    if (!a.config_path.empty()) cfg = load_config(a.config_path);
    std::string mode = a.mode;
    int context = a.context;
    double threshold = a.threshold;
    std::string prev_act = a.prev_act;
    merge_encoder_flags(cfg, a.mode_given, a.context_given, a.threshold_given,
                        a.prev_given, mode, context, threshold, prev_act);
    if (context < 0 || context > 3) throw DataError("context must be in 0..3");
    std::uint64_t seed = resolve_seed(a.seed_given, a.seed, cfg, err);

    SweepGrid grid = paper_grid(seed);
    if (!cfg.hidden_layers.empty()) grid.depths = cfg.hidden_layers;
    if (!cfg.width.empty()) grid.widths = cfg.width;
    if (!cfg.activation.empty()) {
        grid.activations.clear();
        for (const std::string& s : cfg.activation)
            grid.activations.push_back(activation_from_string(s));
    }
    if (!cfg.lr.empty()) grid.lrs = cfg.lr;
    if (!cfg.batch.empty()) {
        grid.batches.clear();
        for (const std::string& s : cfg.batch)
            grid.batches.push_back(batch_strategy_from_string(s));
    }
    if (!cfg.epochs.empty()) grid.epochs = cfg.epochs;
    if (!cfg.dropout.empty()) grid.dropouts = cfg.dropout;

    DialogCorpus corpus = load_corpus(a.corpus_path);
    EncoderConfig encoder =
        make_encoder(corpus.schema, mode, context, threshold, prev_act == "on");

    DialogCorpus train_corpus, val_corpus;
    carve_validation(corpus, seed, train_corpus, val_corpus);
    if (val_corpus.dialogs.empty())
        throw DataError("sweep needs at least 2 dialogs for a validation carve");
    FeatureDataset train_ds = build_dataset(train_corpus, encoder);
    Normalizer norm = fit_normalizer(train_ds.inputs);
    apply_normalizer(train_ds, norm);
    FeatureDataset val_ds = build_dataset(val_corpus, encoder);
    apply_normalizer(val_ds, norm);

    SweepReport report = sweep(train_ds, grid, val_ds, a.jobs);
    OutputSink sink(a.out_path, out);
    *sink.stream << render_sweep(report, a.top == 0 ? report.entries.size() : a.top);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", report.wall_seconds);
    err << "# " << report.entries.size() << " configurations, wall " << buf << "s\n";
    return 0;
}

struct PredictArgs {
    std::string model_path;
    std::string corpus_path;
    std::string out_path;
};

int run_predict(const PredictArgs& a, std::ostream& out, std::ostream& err) {
    LoadedPolicy policy = load_policy(a.model_path);
    DialogCorpus corpus = load_corpus(a.corpus_path);
    if (corpus.schema.slots != policy.encoder.schema.slots ||
        corpus.schema.system_acts != policy.encoder.schema.system_acts)
        throw DataError("corpus schema does not match the model's schema");

    FeatureDataset ds = build_dataset(corpus, policy.encoder);
    apply_normalizer(ds, policy.normalizer);
    const std::vector<double>* priors = policy.priors ? &*policy.priors : nullptr;
    std::vector<int> predicted =
        predict_batch(policy.params, ds.inputs, priors, policy.scaling);

    OutputSink sink(a.out_path, out);
    *sink.stream << "dialog_id,turn,gold_act,predicted_act\n";
    std::size_t i = 0;
    for (const Dialog& d : corpus.dialogs)
        for (std::size_t t = 0; t < d.turns.size(); ++t, ++i)
            *sink.stream << d.id << "," << t << "," << d.turns[t].system_act << ","
                         << policy.encoder.schema
                                .system_acts[static_cast<std::size_t>(predicted[i])]
                         << "\n";

    double er = error_rate(predicted, ds.labels);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", er);
    err << "# ER " << buf << " over " << ds.size() << " turns\n";
    return 0;
}

void print_register(const DialogRegister& reg, std::ostream& out) {
    out << "register:";
    for (int c : reg.codes) out << " " << c;
    out << "\n";
}

void print_step(const SlotSchema& schema, const DialogRegister& reg,
                const std::string& act, const std::vector<double>& probs,
                std::ostream& out) {
    print_register(reg, out);
    out << "act: " << act << "\n";
    std::vector<std::size_t> order(probs.size());
    for (std::size_t j = 0; j < probs.size(); ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&probs](std::size_t x, std::size_t y) {
        return probs[x] > probs[y];
    });
    out << "top3:";
    for (std::size_t r = 0; r < std::min<std::size_t>(3, order.size()); ++r) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", probs[order[r]]);
        out << " " << schema.system_acts[order[r]] << "=" << buf;
    }
    out << "\n";
}

int run_repl(const std::string& model_path, std::ostream& out, std::ostream& err,
             std::istream& in) {
    LoadedPolicy policy = load_policy(model_path);
    Session session(policy);
    const SlotSchema& schema = policy.encoder.schema;
    out << "loaded policy: " << schema.slots.size() << " slots, "
        << schema.system_acts.size() << " acts, mode "
        << to_string(policy.encoder.mode) << ", context " << policy.encoder.context
        << "\n";

    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line == ":quit") return 0;
        if (line == ":reset") {
            session.reset();
            out << "reset\n";
            continue;
        }
        if (line == ":state") {
            print_register(session.register_state(), out);
            out << "turns: " << session.turn_count() << "\n";
            if (session.last_act())
                out << "last act: "
                    << schema.system_acts[static_cast<std::size_t>(*session.last_act())]
                    << "\n";
            continue;
        }
        try {
            UserObservation obs;
            std::istringstream tokens(line);
            std::string token;
            while (tokens >> token) {
                std::size_t eq = token.find('=');
                if (eq == std::string::npos || eq == 0 || eq + 1 == token.size())
                    throw DataError("expected slot=confidence, got '" + token + "'");
                std::string slot = token.substr(0, eq);
                double conf = 0.0;
                try {
                    std::size_t used = 0;
                    conf = std::stod(token.substr(eq + 1), &used);
                    if (used != token.size() - eq - 1) throw std::invalid_argument("");
                } catch (const std::exception&) {
                    throw DataError("bad confidence in '" + token + "'");
                }
                obs.slot_values[slot] = conf;
            }
            auto [act, probs] = session.step(obs);
            print_step(schema, session.register_state(), act, probs, out);
        } catch (const DataError& e) {
            err << "error: " << e.what() << "\n";
        }
    }
    return 0;
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err, std::istream& in) {
    CLI::App app{"dialog-management laboratory: feature codification, classifier "
                 "training, evaluation, and a runtime manager"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic corpus");
    gen_cmd->add_option("--preset", gen.preset, "corpus profile")
        ->required()
        ->check(CLI::IsMember({"demo", "uniform", "dihana-like", "letsgo-like",
                               "dstc-like"}));
    auto* gen_n = gen_cmd->add_option("--n", gen.n, "dialog count");
    gen_cmd->add_option("--noise", gen.noise, "low-confidence probability override")
        ->check(CLI::Range(0.0, 1.0));
    gen_cmd->add_option("--seed", gen.seed, "generation seed")->required();
    gen_cmd->add_option("--out", gen.out_path, "corpus file to write")->required();

    EncodeArgs enc;
    auto* enc_cmd = app.add_subcommand("encode", "dump feature vectors as CSV");
    enc_cmd->add_option("--corpus", enc.corpus_path, "corpus file")->required();
    enc_cmd->add_option("--mode", enc.mode, "feature codification")
        ->check(CLI::IsMember({"dr", "dch"}));
    enc_cmd->add_option("--context", enc.context, "context window size")
        ->check(CLI::Range(0, 3));
    enc_cmd->add_option("--threshold", enc.threshold, "confidence threshold")
        ->check(CLI::Range(0.0, 1.0));
    enc_cmd->add_option("--prev-act", enc.prev_act, "append previous system act")
        ->check(CLI::IsMember({"on", "off"}));
    enc_cmd->add_option("--out", enc.out_path, "write CSV here instead of stdout");

    TrainArgs tr;
    auto* tr_cmd = app.add_subcommand("train", "train a policy and write the artifact");
    tr_cmd->add_option("--corpus", tr.corpus_path, "corpus file")->required();
    auto* tr_mode = tr_cmd->add_option("--mode", tr.mode, "feature codification")
                        ->check(CLI::IsMember({"dr", "dch"}));
    auto* tr_ctx = tr_cmd->add_option("--context", tr.context, "context window size")
                       ->check(CLI::Range(0, 3));
    auto* tr_thr = tr_cmd->add_option("--threshold", tr.threshold, "confidence threshold")
                       ->check(CLI::Range(0.0, 1.0));
    auto* tr_prev = tr_cmd->add_option("--prev-act", tr.prev_act, "append previous act")
                        ->check(CLI::IsMember({"on", "off"}));
    tr_cmd->add_option("--preset", tr.preset, "hyper-parameter preset")
        ->check(CLI::IsMember({"baseline", "tuned"}));
    tr_cmd->add_option("--config", tr.config_path, "configuration file");
    auto* tr_seed = tr_cmd->add_option("--seed", tr.seed, "training seed");
    tr_cmd->add_option("--out", tr.out_path, "model artifact to write")->required();
    tr_cmd->add_option("--balance", tr.balance, "store class priors for balancing")
        ->check(CLI::IsMember({"on", "off"}));
    tr_cmd->add_option("--prior-scaling", tr.prior_scaling, "balancing convention")
        ->check(CLI::IsMember({"divide", "multiply"}));

    EvalArgs ev;
    auto* ev_cmd = app.add_subcommand("eval", "cross-validated error rate");
    ev_cmd->add_option("--corpus", ev.corpus_path, "corpus file")->required();
    auto* ev_mode = ev_cmd->add_option("--mode", ev.mode, "feature codification or both")
                        ->check(CLI::IsMember({"dr", "dch", "both"}));
    auto* ev_ctx = ev_cmd->add_option("--context", ev.context, "window size or all")
                       ->check(CLI::IsMember({"0", "1", "2", "3", "all"}));
    auto* ev_thr = ev_cmd->add_option("--threshold", ev.threshold, "confidence threshold")
                       ->check(CLI::Range(0.0, 1.0));
    auto* ev_prev = ev_cmd->add_option("--prev-act", ev.prev_act, "append previous act")
                        ->check(CLI::IsMember({"on", "off"}));
    ev_cmd->add_option("--preset", ev.preset, "hyper-parameter preset")
        ->check(CLI::IsMember({"baseline", "tuned"}));
    ev_cmd->add_option("--config", ev.config_path, "configuration file");
    ev_cmd->add_option("--k", ev.k, "fold count")->check(CLI::Range(2, 100));
    auto* ev_seed = ev_cmd->add_option("--seed", ev.seed, "split and training seed");
    ev_cmd->add_option("--balance", ev.balance, "prior-balanced prediction")
        ->check(CLI::IsMember({"on", "off"}));
    ev_cmd->add_option("--format", ev.format, "output format")
        ->check(CLI::IsMember({"text", "csv", "markdown"}));
    ev_cmd->add_option("--jobs", ev.jobs, "parallel folds")->check(CLI::Range(1, 256));
    ev_cmd->add_option("--out", ev.out_path, "write the table here instead of stdout");
    ev_cmd->add_option("--confusion", ev.confusion_path,
                       "write the confusion matrix CSV here");
    ev_cmd->add_option("--prior-scaling", ev.prior_scaling, "balancing convention")
        ->check(CLI::IsMember({"divide", "multiply"}));

    SweepArgs sw;
    auto* sw_cmd = app.add_subcommand("sweep", "hyper-parameter grid search");
    sw_cmd->add_option("--corpus", sw.corpus_path, "corpus file")->required();
    auto* sw_mode = sw_cmd->add_option("--mode", sw.mode, "feature codification")
                        ->check(CLI::IsMember({"dr", "dch"}));
    auto* sw_ctx = sw_cmd->add_option("--context", sw.context, "context window size")
                       ->check(CLI::Range(0, 3));
    auto* sw_thr = sw_cmd->add_option("--threshold", sw.threshold, "confidence threshold")
                       ->check(CLI::Range(0.0, 1.0));
    auto* sw_prev = sw_cmd->add_option("--prev-act", sw.prev_act, "append previous act")
                        ->check(CLI::IsMember({"on", "off"}));
    sw_cmd->add_option("--config", sw.config_path, "configuration file with grid axes");
    auto* sw_seed = sw_cmd->add_option("--seed", sw.seed, "sweep seed");
    sw_cmd->add_option("--jobs", sw.jobs, "parallel configurations")
        ->check(CLI::Range(1, 256));
    sw_cmd->add_option("--out", sw.out_path, "write the ranking here instead of stdout");
    sw_cmd->add_option("--top", sw.top, "ranked rows to print (0 = all)");

    PredictArgs pr;
    auto* pr_cmd = app.add_subcommand("predict", "batch predictions over a corpus");
    pr_cmd->add_option("--model", pr.model_path, "model artifact")->required();
    pr_cmd->add_option("--corpus", pr.corpus_path, "corpus file")->required();
    pr_cmd->add_option("--out", pr.out_path, "write CSV here instead of stdout");

    std::string repl_model;
    auto* repl_cmd = app.add_subcommand("repl", "interactive policy inspection");
    repl_cmd->add_option("--model", repl_model, "model artifact")->required();

    std::vector<const char*> argv;
    argv.push_back("dmlab");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        // CLI11's own exit codes are 100+; the documented contract is 1
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    gen.n_given = gen_n->count() > 0;
    tr.seed_given = tr_seed->count() > 0;
    tr.mode_given = tr_mode->count() > 0;
    tr.context_given = tr_ctx->count() > 0;
    tr.threshold_given = tr_thr->count() > 0;
    tr.prev_given = tr_prev->count() > 0;
    ev.seed_given = ev_seed->count() > 0;
    ev.mode_given = ev_mode->count() > 0;
    ev.context_given = ev_ctx->count() > 0;
    ev.threshold_given = ev_thr->count() > 0;
    ev.prev_given = ev_prev->count() > 0;
    sw.seed_given = sw_seed->count() > 0;
    sw.mode_given = sw_mode->count() > 0;
    sw.context_given = sw_ctx->count() > 0;
    sw.threshold_given = sw_thr->count() > 0;
    sw.prev_given = sw_prev->count() > 0;

    try {
        if (gen_cmd->parsed()) return run_gen(gen, err);
        if (enc_cmd->parsed()) return run_encode(enc, out);
        if (tr_cmd->parsed()) return run_train(tr, err);
        if (ev_cmd->parsed()) return run_eval(ev, out, err);
        if (sw_cmd->parsed()) return run_sweep(sw, out, err);
        if (pr_cmd->parsed()) return run_predict(pr, out, err);
        if (repl_cmd->parsed()) return run_repl(repl_model, out, err, in);
    } catch (const CLI::RuntimeError& e) {
        return e.get_exit_code();
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const RuntimeFailure& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

} // namespace dm::cli
