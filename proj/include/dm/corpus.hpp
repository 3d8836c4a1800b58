#ifndef DM_CORPUS_HPP
#define DM_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dm {

// Slot and system-act inventory of a task. Order matters: it fixes the
// feature-vector layout and the output class indices.
struct SlotSchema {
    std::string name;
    std::vector<std::string> slots;
    std::vector<std::string> system_acts;

    std::optional<std::size_t> slot_index(const std::string& slot) const;
    std::optional<std::size_t> act_index(const std::string& act) const;

    // Throws DataError on empty or duplicated identifiers.
    void check() const;
};

// One user turn as seen by the manager: the slots mentioned this turn with
// their recognition confidence. Slots not mentioned are simply absent.
struct UserObservation {
    std::map<std::string, double> slot_values;
};

struct Turn {
    UserObservation user;
    std::string system_act; // supervised target
};

struct Dialog {
    std::string id;
    std::vector<Turn> turns;
};

struct DialogCorpus {
    SlotSchema schema;
    std::vector<Dialog> dialogs;

    std::size_t total_turns() const;
};

struct Violation {
    std::string dialog_id;
    int turn_index; // -1 when not tied to a turn
    std::string message;
};

// Structural validation of a corpus against its schema. Violations are data,
// not failures: the report is empty iff the corpus is valid.
std::vector<Violation> validate_corpus(const DialogCorpus& corpus);

// JSON-lines corpus format, "dmcorpus/1". Line 1 is the schema, every further
// line one dialog. load throws DataError with the offending line number;
// the writer output is canonical, so load + save round-trips byte-for-byte.
DialogCorpus load_corpus(const std::filesystem::path& path);
std::string corpus_to_jsonl(const DialogCorpus& corpus);
void save_corpus(const DialogCorpus& corpus, const std::filesystem::path& path);

std::string schema_to_json(const SlotSchema& schema);
SlotSchema schema_from_json(const std::string& line);

// Splits dialog ids into k folds of near-equal size (|max-min| <= 1),
// deterministically for a fixed seed. Splitting is at dialog granularity so
// turns of one dialog never straddle a train/test boundary.
std::map<std::string, int> split_folds(const DialogCorpus& corpus, int k,
                                       std::uint64_t seed);

// Smoothed class priors: (count + smoothing) / (N + smoothing * |acts|).
// Keys cover every schema act; values sum to 1.
std::map<std::string, double> class_priors(const std::vector<std::string>& labels,
                                           const SlotSchema& schema,
                                           double smoothing);

// Keeps only the dialogs whose id is in `ids`, preserving corpus order.
DialogCorpus subset_by_ids(const DialogCorpus& corpus,
                           const std::vector<std::string>& ids);

// The bundled DSTC-style schema: 12 user inputs, 17 system acts.
SlotSchema dstc12_schema();

} // namespace dm

#endif
