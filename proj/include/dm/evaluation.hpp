#ifndef DM_EVALUATION_HPP
#define DM_EVALUATION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dm/corpus.hpp"
#include "dm/features.hpp"
#include "dm/training.hpp"

namespace dm {

// M/N * 100 where M counts positions with predicted != gold.
double error_rate(const std::vector<int>& predicted, const std::vector<int>& gold);

// K x K counts, rows = gold act, columns = predicted act.
std::vector<std::vector<int>> confusion_matrix(const std::vector<int>& predicted,
                                               const std::vector<int>& gold, int k);

struct EvaluationReport {
    double er_percent = 0.0;
    std::vector<std::vector<int>> confusion;
    std::size_t n = 0;
    std::size_t errors = 0;
    std::vector<double> per_fold_er;
    std::vector<std::size_t> per_fold_n;
    std::vector<std::size_t> per_fold_errors;
    // config echo
    EncoderConfig encoder;
    int k_folds = 0;
    bool balanced = false;
    std::uint64_t seed = 0;
};

enum class ReportFormat { Text, Csv, Markdown };
ReportFormat report_format_from_string(const std::string& s);

// Per-fold predictions in corpus order, so callers can compare runs turn by
// turn. dialog_ids/turn_index parallel the predicted/gold lists.
struct FoldPredictions {
    std::vector<std::string> dialog_id;
    std::vector<int> turn_index;
    std::vector<int> predicted;
    std::vector<int> gold;
};

struct CrossValidationOptions {
    int k = 5;
    std::uint64_t seed = 0;
    bool balance = false;
    PriorScaling scaling = PriorScaling::Divide;
    int jobs = 1;
    // filled when non-null: per-fold prediction lists, fold order
    std::vector<FoldPredictions>* capture = nullptr;
};

// Dialog-granular k-fold protocol: fold f is the test set; 10% of the
// remaining dialogs (at least one, seeded carve) become validation for
// checkpoint selection; normalizer and priors are fitted on the inner
// training dialogs only. Aggregate ER pools every test turn.
EvaluationReport cross_validate(const DialogCorpus& corpus, const EncoderConfig& encoder,
                                const Hyperparams& hp, const CrossValidationOptions& opts);

std::string render_report(const EvaluationReport& report, ReportFormat format);

// Rows = context 0..3, columns = the two feature modes; cells hold aggregate
// ER to one decimal place.
struct GridCell {
    int context = 0;
    FeatureMode mode = FeatureMode::DialogRegister;
    EvaluationReport report;
};
std::string render_grid(const std::vector<GridCell>& cells, ReportFormat format);

std::string confusion_csv(const EvaluationReport& report);

} // namespace dm

#endif
