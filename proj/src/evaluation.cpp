#include "dm/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "dm/rng.hpp"

namespace dm {

namespace {

// Stream tag for the per-fold validation carve, distinct from the per-fold
// training seed which uses the fold index directly.
constexpr std::uint64_t kCarveStream = 1000;

std::string format_er(double er) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", er);
    return buf;
}

std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct FoldOutcome {
    std::vector<int> predicted;
    std::vector<int> gold;
    FoldPredictions provenance;
};

std::vector<std::string> gold_labels(const DialogCorpus& corpus) {
    std::vector<std::string> labels;
    for (const Dialog& d : corpus.dialogs)
        for (const Turn& t : d.turns) labels.push_back(t.system_act);
    return labels;
}

} // namespace

double error_rate(const std::vector<int>& predicted, const std::vector<int>& gold) {
    if (predicted.size() != gold.size())
        throw std::invalid_argument("prediction/gold length mismatch");
    if (predicted.empty()) throw std::invalid_argument("empty prediction list");
    std::size_t m = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] != gold[i]) ++m;
    return static_cast<double>(m) / static_cast<double>(predicted.size()) * 100.0;
}

std::vector<std::vector<int>> confusion_matrix(const std::vector<int>& predicted,
                                               const std::vector<int>& gold, int k) {
    if (predicted.size() != gold.size())
        throw std::invalid_argument("prediction/gold length mismatch");
    if (predicted.empty()) throw std::invalid_argument("empty prediction list");
    if (k < 1) throw std::invalid_argument("class count must be positive");
    std::vector<std::vector<int>> m(static_cast<std::size_t>(k),
                                    std::vector<int>(static_cast<std::size_t>(k), 0));
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        int g = gold[i];
        int p = predicted[i];
        if (g < 0 || g >= k || p < 0 || p >= k)
            throw std::invalid_argument("act index outside [0,K)");
        ++m[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)];
    }
    return m;
}

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "text") return ReportFormat::Text;
    if (s == "csv") return ReportFormat::Csv;
    if (s == "markdown") return ReportFormat::Markdown;
    throw std::invalid_argument("unknown format '" + s + "'");
}

EvaluationReport cross_validate(const DialogCorpus& corpus, const EncoderConfig& encoder,
                                const Hyperparams& hp, const CrossValidationOptions& opts) {
    if (opts.k < 2) throw std::invalid_argument("need at least 2 folds");
    if (corpus.dialogs.size() < static_cast<std::size_t>(opts.k))
        throw std::invalid_argument("fewer dialogs than folds");
    if (opts.jobs < 1) throw std::invalid_argument("jobs must be >= 1");

    const std::map<std::string, int> fold_of = split_folds(corpus, opts.k, opts.seed);
    const int k_acts = static_cast<int>(corpus.schema.system_acts.size());

    std::vector<FoldOutcome> outcomes(static_cast<std::size_t>(opts.k));
    std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic) num_threads(opts.jobs) if (opts.jobs > 1)
    for (int f = 0; f < opts.k; ++f) {
        try {
            std::vector<std::string> test_ids;
            std::vector<std::string> rest_ids;
            for (const Dialog& d : corpus.dialogs)
                (fold_of.at(d.id) == f ? test_ids : rest_ids).push_back(d.id);

            // Seeded dialog-level carve: ~10% of the training fold becomes the
            // validation set for checkpoint selection.
            std::vector<std::string> shuffled = rest_ids;
            Rng carve_rng(Rng::mix(opts.seed, kCarveStream + static_cast<std::uint64_t>(f)));
            carve_rng.shuffle(shuffled);
            std::size_t val_n =
                rest_ids.size() >= 2 ? std::max<std::size_t>(1, rest_ids.size() / 10) : 0;
            std::vector<std::string> val_ids(shuffled.begin(),
                                             shuffled.begin() + static_cast<long>(val_n));
            std::sort(val_ids.begin(), val_ids.end());
            std::vector<std::string> train_ids;
            for (const std::string& id : rest_ids)
                if (!std::binary_search(val_ids.begin(), val_ids.end(), id))
                    train_ids.push_back(id);

            DialogCorpus train_corpus = subset_by_ids(corpus, train_ids);
            DialogCorpus val_corpus = subset_by_ids(corpus, val_ids);
            DialogCorpus test_corpus = subset_by_ids(corpus, test_ids);

            FeatureDataset train_ds = build_dataset(train_corpus, encoder);
            FeatureDataset test_ds = build_dataset(test_corpus, encoder);

            // Normalizer and priors see inner-train data only.
            Normalizer norm = fit_normalizer(train_ds.inputs);
            apply_normalizer(train_ds, norm);
            apply_normalizer(test_ds, norm);

            FeatureDataset val_ds;
            const FeatureDataset* val_ptr = nullptr;
            if (!val_corpus.dialogs.empty()) {
                val_ds = build_dataset(val_corpus, encoder);
                apply_normalizer(val_ds, norm);
                val_ptr = &val_ds;
            }

            Hyperparams fold_hp = hp;
            fold_hp.seed = Rng::mix(opts.seed, static_cast<std::uint64_t>(f));
            auto [params, report] = train(train_ds, fold_hp, val_ptr);
            (void)report;

            std::vector<double> priors_vec;
            const std::vector<double>* priors_ptr = nullptr;
            if (opts.balance) {
                std::map<std::string, double> priors =
                    class_priors(gold_labels(train_corpus), corpus.schema, 1.0);
                for (const std::string& act : corpus.schema.system_acts)
                    priors_vec.push_back(priors.at(act));
                priors_ptr = &priors_vec;
            }

            FoldOutcome outcome;
            outcome.predicted = predict_batch(params, test_ds.inputs, priors_ptr, opts.scaling);
            outcome.gold = test_ds.labels;
            for (const Dialog& d : test_corpus.dialogs)
                for (std::size_t t = 0; t < d.turns.size(); ++t) {
                    outcome.provenance.dialog_id.push_back(d.id);
                    outcome.provenance.turn_index.push_back(static_cast<int>(t));
                }
            outcome.provenance.predicted = outcome.predicted;
            outcome.provenance.gold = outcome.gold;
            outcomes[static_cast<std::size_t>(f)] = std::move(outcome);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    EvaluationReport report;
    report.encoder = encoder;
    report.k_folds = opts.k;
    report.balanced = opts.balance;
    report.seed = opts.seed;

    std::vector<int> all_predicted;
    std::vector<int> all_gold;
    for (const FoldOutcome& outcome : outcomes) {
        std::size_t errors = 0;
        for (std::size_t i = 0; i < outcome.predicted.size(); ++i)
            if (outcome.predicted[i] != outcome.gold[i]) ++errors;
        report.per_fold_n.push_back(outcome.predicted.size());
        report.per_fold_errors.push_back(errors);
        report.per_fold_er.push_back(error_rate(outcome.predicted, outcome.gold));
        all_predicted.insert(all_predicted.end(), outcome.predicted.begin(),
                             outcome.predicted.end());
        all_gold.insert(all_gold.end(), outcome.gold.begin(), outcome.gold.end());
        if (opts.capture) opts.capture->push_back(outcome.provenance);
    }

    report.n = all_predicted.size();
    for (std::size_t i = 0; i < all_predicted.size(); ++i)
        if (all_predicted[i] != all_gold[i]) ++report.errors;
    report.er_percent = error_rate(all_predicted, all_gold);
    report.confusion = confusion_matrix(all_predicted, all_gold, k_acts);
    return report;
}

std::string render_report(const EvaluationReport& report, ReportFormat format) {
    std::ostringstream out;
    switch (format) {
        case ReportFormat::Text: {
            out << "mode " << to_string(report.encoder.mode) << ", context "
                << report.encoder.context << ", " << report.k_folds << " folds, balance "
                << (report.balanced ? "on" : "off") << "\n";
            for (std::size_t f = 0; f < report.per_fold_er.size(); ++f)
                out << "  fold " << f << ": ER " << format_er(report.per_fold_er[f])
                    << " (" << report.per_fold_errors[f] << "/" << report.per_fold_n[f]
                    << ")\n";
            out << "  overall: ER " << format_er(report.er_percent) << " ("
                << report.errors << "/" << report.n << ")\n";
            break;
        }
        case ReportFormat::Markdown: {
            out << "| fold | n | errors | ER |\n|---|---|---|---|\n";
            for (std::size_t f = 0; f < report.per_fold_er.size(); ++f)
                out << "| " << f << " | " << report.per_fold_n[f] << " | "
                    << report.per_fold_errors[f] << " | "
                    << format_er(report.per_fold_er[f]) << " |\n";
            out << "| all | " << report.n << " | " << report.errors << " | "
                << format_er(report.er_percent) << " |\n";
            break;
        }
        case ReportFormat::Csv: {
            out << "mode,context,fold,n,errors,er_percent\n";
            for (std::size_t f = 0; f < report.per_fold_er.size(); ++f)
                out << to_string(report.encoder.mode) << "," << report.encoder.context
                    << "," << f << "," << report.per_fold_n[f] << ","
                    << report.per_fold_errors[f] << ","
                    << format_full(report.per_fold_er[f]) << "\n";
            out << to_string(report.encoder.mode) << "," << report.encoder.context
                << ",all," << report.n << "," << report.errors << ","
                << format_full(report.er_percent) << "\n";
            break;
        }
    }
    return out.str();
}

std::string render_grid(const std::vector<GridCell>& cells, ReportFormat format) {
    // cell lookup by (context, mode); missing cells render as blanks
    auto find_cell = [&cells](int context, FeatureMode mode) -> const GridCell* {
        for (const GridCell& c : cells)
            if (c.context == context && c.mode == mode) return &c;
        return nullptr;
    };
    std::vector<int> contexts;
    for (const GridCell& c : cells)
        if (std::find(contexts.begin(), contexts.end(), c.context) == contexts.end())
            contexts.push_back(c.context);
    std::sort(contexts.begin(), contexts.end());

    std::ostringstream out;
    if (format == ReportFormat::Csv) {
        out << "mode,context,fold,n,errors,er_percent\n";
        for (const GridCell& c : cells) {
            std::string body = render_report(c.report, ReportFormat::Csv);
            out << body.substr(body.find('\n') + 1);
        }
        return out.str();
    }

    const char* sep = format == ReportFormat::Markdown ? " | " : "  ";
    if (format == ReportFormat::Markdown) {
        out << "| Context | Dialog Registers | Dialog Changes |\n";
        out << "|---|---|---|\n";
    } else {
        out << "Context" << sep << "Dialog Registers" << sep << "Dialog Changes\n";
    }
    for (int context : contexts) {
        const GridCell* dr = find_cell(context, FeatureMode::DialogRegister);
        const GridCell* dch = find_cell(context, FeatureMode::DialogChanges);
        std::string dr_text = dr ? format_er(dr->report.er_percent) : "-";
        std::string dch_text = dch ? format_er(dch->report.er_percent) : "-";
        if (format == ReportFormat::Markdown)
            out << "| " << context << " | " << dr_text << " | " << dch_text << " |\n";
        else
            out << context << "      " << sep << dr_text
                << std::string(16 > dr_text.size() ? 16 - dr_text.size() : 0, ' ') << sep
                << dch_text << "\n";
    }
    return out.str();
}

std::string confusion_csv(const EvaluationReport& report) {
    std::ostringstream out;
    const std::vector<std::string>& acts = report.encoder.schema.system_acts;
    for (std::size_t j = 0; j < acts.size(); ++j)
        out << (j ? "," : "") << acts[j];
    out << "\n";
    for (const std::vector<int>& row : report.confusion) {
        for (std::size_t j = 0; j < row.size(); ++j)
            out << (j ? "," : "") << row[j];
        out << "\n";
    }
    return out.str();
}

} // namespace dm
