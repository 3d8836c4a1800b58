#include "dm/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dm/error.hpp"
#include "dm/rng.hpp"

namespace dm {

using json = nlohmann::ordered_json;

static constexpr const char* kFormatTag = "dmcorpus/1";

std::optional<std::size_t> SlotSchema::slot_index(const std::string& slot) const {
    auto it = std::find(slots.begin(), slots.end(), slot);
    if (it == slots.end()) return std::nullopt;
    return static_cast<std::size_t>(it - slots.begin());
}

std::optional<std::size_t> SlotSchema::act_index(const std::string& act) const {
    auto it = std::find(system_acts.begin(), system_acts.end(), act);
    if (it == system_acts.end()) return std::nullopt;
    return static_cast<std::size_t>(it - system_acts.begin());
}

void SlotSchema::check() const {
    if (slots.empty()) throw DataError("schema '" + name + "': slot list is empty");
    if (system_acts.empty()) throw DataError("schema '" + name + "': system-act list is empty");
    std::set<std::string> seen;
    for (const auto& s : slots)
        if (!seen.insert(s).second)
            throw DataError("schema '" + name + "': duplicate slot '" + s + "'");
    seen.clear();
    for (const auto& a : system_acts)
        if (!seen.insert(a).second)
            throw DataError("schema '" + name + "': duplicate system act '" + a + "'");
}

std::size_t DialogCorpus::total_turns() const {
    std::size_t n = 0;
    for (const auto& d : dialogs) n += d.turns.size();
    return n;
}

std::vector<Violation> validate_corpus(const DialogCorpus& corpus) {
    std::vector<Violation> out;
    try {
        corpus.schema.check();
    } catch (const DataError& e) {
        out.push_back({"", -1, e.what()});
        return out;
    }
    std::set<std::string> ids;
    for (const auto& dialog : corpus.dialogs) {
        if (!ids.insert(dialog.id).second)
            out.push_back({dialog.id, -1, "duplicate dialog id '" + dialog.id + "'"});
        if (dialog.turns.empty())
            out.push_back({dialog.id, -1, "dialog has no turns"});
        for (std::size_t t = 0; t < dialog.turns.size(); ++t) {
            const Turn& turn = dialog.turns[t];
            if (!corpus.schema.act_index(turn.system_act))
                out.push_back({dialog.id, static_cast<int>(t),
                               "unknown system act '" + turn.system_act + "'"});
            for (const auto& [slot, conf] : turn.user.slot_values) {
                if (!corpus.schema.slot_index(slot))
                    out.push_back({dialog.id, static_cast<int>(t),
                                   "unknown slot '" + slot + "'"});
                if (!(conf >= 0.0 && conf <= 1.0))
                    out.push_back({dialog.id, static_cast<int>(t),
                                   "confidence for slot '" + slot + "' outside [0,1]"});
            }
        }
    }
    return out;
}

std::string schema_to_json(const SlotSchema& schema) {
    json j;
    j["format"] = kFormatTag;
    j["name"] = schema.name;
    j["slots"] = schema.slots;
    j["system_acts"] = schema.system_acts;
    return j.dump();
}

static std::vector<std::string> string_list(const json& j, const char* key,
                                            const std::string& where) {
    if (!j.contains(key) || !j[key].is_array())
        throw DataError(where + ": missing array field '" + key + "'");
    std::vector<std::string> out;
    for (const auto& v : j[key]) {
        if (!v.is_string())
            throw DataError(where + ": non-string entry in '" + key + "'");
        out.push_back(v.get<std::string>());
    }
    return out;
}

SlotSchema schema_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("schema line: malformed record: ") + e.what());
    }
    if (!j.contains("format") || j["format"] != kFormatTag)
        throw DataError("schema line: expected format tag '" + std::string(kFormatTag) + "'");
    SlotSchema schema;
    schema.name = j.value("name", "");
    schema.slots = string_list(j, "slots", "schema line");
    schema.system_acts = string_list(j, "system_acts", "schema line");
    schema.check();
    return schema;
}

static std::string dialog_to_json(const Dialog& dialog, const SlotSchema& schema) {
    json j;
    j["id"] = dialog.id;
    json turns = json::array();
    for (const auto& turn : dialog.turns) {
        json slots = json::object();
        // canonical order: schema order, not insertion order
        for (const auto& slot : schema.slots) {
            auto it = turn.user.slot_values.find(slot);
            if (it != turn.user.slot_values.end()) slots[slot] = it->second;
        }
        json t;
        t["user"] = json{{"slots", slots}};
        t["system_act"] = turn.system_act;
        turns.push_back(std::move(t));
    }
    j["turns"] = std::move(turns);
    return j.dump();
}

std::string corpus_to_jsonl(const DialogCorpus& corpus) {
    std::string out = schema_to_json(corpus.schema);
    out.push_back('\n');
    for (const auto& dialog : corpus.dialogs) {
        out += dialog_to_json(dialog, corpus.schema);
        out.push_back('\n');
    }
    return out;
}

void save_corpus(const DialogCorpus& corpus, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open '" + path.string() + "' for writing");
    f << corpus_to_jsonl(corpus);
    if (!f) throw DataError("write to '" + path.string() + "' failed");
}

DialogCorpus load_corpus(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open corpus file '" + path.string() + "'");

    DialogCorpus corpus;
    std::string line;
    int lineno = 0;
    bool have_schema = false;
    std::set<std::string> ids;

    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(lineno);
        if (!have_schema) {
            try {
                corpus.schema = schema_from_json(line);
            } catch (const DataError& e) {
                throw DataError(where + ": " + e.what());
            }
            have_schema = true;
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(where + ": malformed record: " + e.what());
        }
        if (!j.contains("id") || !j["id"].is_string())
            throw DataError(where + ": dialog record lacks string 'id'");
        Dialog dialog;
        dialog.id = j["id"].get<std::string>();
        if (!ids.insert(dialog.id).second)
            throw DataError(where + ": duplicate dialog id '" + dialog.id + "'");
        if (!j.contains("turns") || !j["turns"].is_array())
            throw DataError(where + ": dialog record lacks array 'turns'");
        for (const auto& t : j["turns"]) {
            Turn turn;
            if (!t.contains("system_act") || !t["system_act"].is_string())
                throw DataError(where + ": turn lacks string 'system_act'");
            turn.system_act = t["system_act"].get<std::string>();
            if (!corpus.schema.act_index(turn.system_act))
                throw DataError(where + ": unknown system act '" + turn.system_act + "'");
            if (t.contains("user")) {
                const auto& user = t["user"];
                if (!user.is_object() || (user.contains("slots") && !user["slots"].is_object()))
                    throw DataError(where + ": malformed 'user' object");
                if (user.contains("slots")) {
                    for (const auto& [slot, conf] : user["slots"].items()) {
                        if (!corpus.schema.slot_index(slot))
                            throw DataError(where + ": unknown slot '" + slot + "'");
                        if (!conf.is_number())
                            throw DataError(where + ": confidence for slot '" + slot +
                                            "' is not a number");
                        double c = conf.get<double>();
                        if (!(c >= 0.0 && c <= 1.0))
                            throw DataError(where + ": confidence " + std::to_string(c) +
                                            " for slot '" + slot + "' outside [0,1]");
                        turn.user.slot_values[slot] = c;
                    }
                }
            }
            dialog.turns.push_back(std::move(turn));
        }
        if (dialog.turns.empty())
            throw DataError(where + ": dialog '" + dialog.id + "' has no turns");
        corpus.dialogs.push_back(std::move(dialog));
    }
    if (!have_schema)
        throw DataError(path.string() + ": no schema line found");
    return corpus;
}

std::map<std::string, int> split_folds(const DialogCorpus& corpus, int k,
                                       std::uint64_t seed) {
    if (k < 2)
        throw std::invalid_argument("split_folds: k must be >= 2, got " + std::to_string(k));
    if (corpus.dialogs.size() < static_cast<std::size_t>(k))
        throw std::invalid_argument("split_folds: corpus has " +
                                    std::to_string(corpus.dialogs.size()) +
                                    " dialogs, fewer than k=" + std::to_string(k));
    std::vector<std::string> ids;
    ids.reserve(corpus.dialogs.size());
    for (const auto& d : corpus.dialogs) ids.push_back(d.id);

    Rng rng(Rng::mix(seed, 0x5f01d5));
    rng.shuffle(ids);

    std::map<std::string, int> assignment;
    for (std::size_t i = 0; i < ids.size(); ++i)
        assignment[ids[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    return assignment;
}

std::map<std::string, double> class_priors(const std::vector<std::string>& labels,
                                           const SlotSchema& schema,
                                           double smoothing) {
    if (smoothing < 0.0)
        throw std::invalid_argument("class_priors: smoothing must be >= 0");
    std::map<std::string, double> counts;
    for (const auto& act : schema.system_acts) counts[act] = 0.0;
    for (const auto& label : labels) {
        auto it = counts.find(label);
        if (it == counts.end())
            throw std::invalid_argument("class_priors: label '" + label +
                                        "' not in schema");
        it->second += 1.0;
    }
    const double denom = static_cast<double>(labels.size()) +
                         smoothing * static_cast<double>(schema.system_acts.size());
    if (denom <= 0.0)
        throw std::invalid_argument("class_priors: no labels and no smoothing");
    for (auto& [act, c] : counts) c = (c + smoothing) / denom;
    return counts;
}

DialogCorpus subset_by_ids(const DialogCorpus& corpus,
                           const std::vector<std::string>& ids) {
    std::set<std::string> wanted(ids.begin(), ids.end());
    DialogCorpus out;
    out.schema = corpus.schema;
    for (const auto& d : corpus.dialogs)
        if (wanted.count(d.id)) out.dialogs.push_back(d);
    return out;
}

SlotSchema dstc12_schema() {
    SlotSchema s;
    s.name = "dstc12";
    s.slots = {"route", "from", "to", "date", "time", "affirm",
               "negate", "nextbus", "prevbus", "repeat", "bye", "restart"};
    // 17-act inventory in four groups: direct requests, confirmations,
    // indirect confirmation+request, system. The original inventory is not
    // public; these member names are reconstructions (see README).
    s.system_acts = {"request_route", "request_from", "request_to",
                     "request_date", "request_time",
                     "confirm_route", "confirm_from", "confirm_to",
                     "confirm_date", "confirm_time",
                     "confirm_from_request_to", "confirm_to_request_time",
                     "hello", "restart", "error", "repeat", "provide_schedule"};
    return s;
}

} // namespace dm
