#include "dm/synthetic.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "dm/error.hpp"
#include "dm/features.hpp"
#include "dm/rng.hpp"

namespace dm {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

bool all_zero(const std::vector<int>& codes) {
    return std::all_of(codes.begin(), codes.end(), [](int c) { return c == 0; });
}

// Appends one slot mention: full confidence, or a low draw in [0.15, 0.5].
void supply(UserObservation& obs, const SlotSchema& schema, std::size_t slot,
            double noise, Rng& rng) {
    double conf = rng.bernoulli(noise) ? 0.15 + 0.35 * rng.next_double() : 1.0;
    obs.slot_values[schema.slots[slot]] = conf;
}

UserObservation simulate_user(const SyntheticConfig& cfg, const std::vector<int>& codes,
                              bool first_turn, Rng& rng) {
    UserObservation obs;
    if (first_turn && rng.bernoulli(cfg.p_silent_first)) return obs;
    if (!first_turn && rng.bernoulli(cfg.p_idle)) return obs;

    std::vector<std::size_t> pending;
    for (std::size_t slot : cfg.info_slots)
        if (codes[slot] != 1) pending.push_back(slot);

    if (!pending.empty()) {
        std::size_t pick = cfg.ordered_fill
                               ? pending.front()
                               : pending[rng.next_below(pending.size())];
        supply(obs, cfg.schema, pick, cfg.confidence_noise, rng);
        if (pending.size() > 1 && rng.bernoulli(cfg.p_extra)) {
            std::vector<std::size_t> rest;
            for (std::size_t slot : pending)
                if (slot != pick) rest.push_back(slot);
            supply(obs, cfg.schema, rest[rng.next_below(rest.size())],
                   cfg.confidence_noise, rng);
        }
    } else if (cfg.closing_slot && codes[*cfg.closing_slot] != 1) {
        if (rng.bernoulli(cfg.p_bye))
            supply(obs, cfg.schema, *cfg.closing_slot, cfg.confidence_noise, rng);
    }

    if (cfg.p_volunteer > 0.0 && rng.bernoulli(cfg.p_volunteer)) {
        std::vector<std::size_t> optional;
        for (std::size_t slot = 0; slot < cfg.schema.slots.size(); ++slot) {
            bool is_info = std::find(cfg.info_slots.begin(), cfg.info_slots.end(), slot) !=
                           cfg.info_slots.end();
            bool is_closing = cfg.closing_slot && *cfg.closing_slot == slot;
            if (!is_info && !is_closing) optional.push_back(slot);
        }
        if (!optional.empty())
            supply(obs, cfg.schema, optional[rng.next_below(optional.size())],
                   cfg.confidence_noise, rng);
    }
    return obs;
}

// Policy skeleton shared by the corpus-profile presets: greet, confirm shaky
// info, request missing info, then close once the farewell slot lands; clean
// volunteered slots get acknowledged while waiting for the farewell.
std::function<std::string(const std::vector<int>&)> slot_filling_policy(
    const SlotSchema& schema, std::vector<std::size_t> info,
    std::size_t closing_slot, std::string opening_act, std::string closing_act,
    std::string unclear_act, std::string waiting_act, std::string request_prefix,
    std::string confirm_prefix, std::string ack_prefix) {
    return [=](const std::vector<int>& codes) -> std::string {
        if (all_zero(codes)) return opening_act;
        for (std::size_t slot : info)
            if (codes[slot] == 2) return confirm_prefix + schema.slots[slot];
        for (std::size_t slot : info)
            if (codes[slot] == 0) return request_prefix + schema.slots[slot];
        if (codes[closing_slot] == 1) return closing_act;
        for (std::size_t slot = 0; slot < codes.size(); ++slot) {
            bool is_info = std::find(info.begin(), info.end(), slot) != info.end();
            if (is_info || slot == closing_slot) continue;
            if (codes[slot] == 2) return unclear_act;
        }
        for (std::size_t slot = 0; slot < codes.size(); ++slot) {
            bool is_info = std::find(info.begin(), info.end(), slot) != info.end();
            if (is_info || slot == closing_slot) continue;
            if (codes[slot] == 1) return ack_prefix + schema.slots[slot];
        }
        return waiting_act;
    };
}

} // namespace

void SyntheticConfig::check() const {
    schema.check();
    require(static_cast<bool>(policy), "policy must be set");
    require(schema.act_index(closing_act).has_value(), "closing act not in schema");
    require(!info_slots.empty(), "info slots must be set");
    for (std::size_t slot : info_slots)
        require(slot < schema.slots.size(), "info slot index out of range");
    if (closing_slot)
        require(*closing_slot < schema.slots.size(), "closing slot index out of range");
    for (double p : {confidence_noise, p_silent_first, p_idle, p_extra, p_volunteer, p_bye})
        require(p >= 0.0 && p <= 1.0, "probabilities must be in [0,1]");
    require(threshold >= 0.0 && threshold <= 1.0, "threshold must be in [0,1]");
    require(turn_cap >= 1, "turn cap must be >= 1");
}

DialogCorpus generate_synthetic(const SyntheticConfig& config) {
    config.check();
    DialogCorpus corpus;
    corpus.schema = config.schema;

    int width = 1;
    for (std::size_t n = config.n_dialogs; n >= 10; n /= 10) ++width;

    for (std::size_t d = 0; d < config.n_dialogs; ++d) {
        Rng rng(Rng::mix(config.seed, d));
        Dialog dialog;
        std::string digits = std::to_string(d + 1);
        std::string pad(static_cast<std::size_t>(width) > digits.size()
                            ? static_cast<std::size_t>(width) - digits.size()
                            : 0,
                        '0');
        dialog.id = "d" + pad + digits;

        DialogRegister reg = DialogRegister::initial(config.schema);
        bool closed = false;
        for (int turn = 0; turn < config.turn_cap; ++turn) {
            UserObservation obs = simulate_user(config, reg.codes, turn == 0, rng);
            reg = update_register(reg, obs, config.threshold, config.schema);
            std::string act = config.policy(reg.codes);
            if (!config.schema.act_index(act))
                throw RuntimeFailure("policy produced unknown act '" + act + "'");
            dialog.turns.push_back({obs, act});
            if (act == config.closing_act) {
                closed = true;
                break;
            }
        }
        if (!closed) {
            std::ostringstream msg;
            msg << "dialog " << dialog.id << ": closing act not reached within "
                << config.turn_cap << " turns";
            throw RuntimeFailure(msg.str());
        }
        corpus.dialogs.push_back(std::move(dialog));
    }
    return corpus;
}

SyntheticConfig demo_config(std::size_t n_dialogs, double noise, std::uint64_t seed) {
    SyntheticConfig cfg;
    cfg.schema.name = "demo";
    cfg.schema.slots = {"origin", "destination", "date", "time", "berth"};
    cfg.schema.system_acts = {"welcome",      "request_origin", "request_destination",
                              "request_date", "request_time",   "request_berth",
                              "clarify_low",  "finish"};
    cfg.info_slots = {0, 1, 2, 3, 4};
    cfg.closing_act = "finish";
    cfg.n_dialogs = n_dialogs;
    cfg.confidence_noise = noise;
    cfg.p_silent_first = 0.3;
    cfg.p_extra = 0.25;
    cfg.seed = seed;
    const SlotSchema schema = cfg.schema;
    cfg.policy = [schema](const std::vector<int>& codes) -> std::string {
        if (all_zero(codes)) return "welcome";
        for (int c : codes)
            if (c == 2) return "clarify_low";
        for (std::size_t slot = 0; slot < codes.size(); ++slot)
            if (codes[slot] == 0) return "request_" + schema.slots[slot];
        return "finish";
    };
    return cfg;
}

SyntheticConfig uniform_config(std::size_t n_dialogs, std::uint64_t seed) {
    SyntheticConfig cfg;
    cfg.schema.name = "uniform";
    cfg.schema.slots = {"alpha", "bravo", "charlie", "delta"};
    cfg.schema.system_acts = {"ask_alpha", "ask_bravo", "ask_charlie", "ask_delta",
                              "done"};
    cfg.info_slots = {0, 1, 2, 3};
    cfg.closing_act = "done";
    cfg.n_dialogs = n_dialogs;
    cfg.p_silent_first = 1.0; // the register stays empty for the opening turn
    cfg.ordered_fill = true;
    cfg.seed = seed;
    const SlotSchema schema = cfg.schema;
    cfg.policy = [schema](const std::vector<int>& codes) -> std::string {
        for (std::size_t slot = 0; slot < codes.size(); ++slot)
            if (codes[slot] != 1) return "ask_" + schema.slots[slot];
        return "done";
    };
    return cfg;
}

SyntheticConfig dihana_like_config(std::size_t n_dialogs, std::uint64_t seed) {
    SyntheticConfig cfg;
    cfg.schema.name = "dihana-like";
    cfg.schema.slots = {"origin",      "destination", "date",        "time",
                        "train_type",  "ticket_class", "price",      "duration",
                        "return_date", "return_time", "platform",    "stops",
                        "distance",    "service",     "affirmation", "negation",
                        "courtesy",    "farewell"};
    cfg.schema.system_acts = {
        "opening",          "closing",          "waiting",       "undefined",
        "request_origin",   "request_destination", "request_date", "request_time",
        "confirm_origin",   "confirm_destination", "confirm_date", "confirm_time",
        "ack_train_type",   "ack_ticket_class", "ack_price",     "ack_duration",
        "ack_return_date",  "ack_return_time",  "ack_platform",  "ack_stops",
        "ack_distance",     "ack_service",      "ack_affirmation", "ack_negation",
        "ack_courtesy",     "new_query",        "acceptance",    "rejection",
        "help"};
    cfg.info_slots = {0, 1, 2, 3};
    cfg.closing_slot = 17;
    cfg.closing_act = "closing";
    cfg.n_dialogs = n_dialogs;
    cfg.confidence_noise = 0.15;
    cfg.p_silent_first = 0.25;
    cfg.p_extra = 0.35;
    cfg.p_volunteer = 0.1;
    cfg.p_bye = 0.9;
    cfg.seed = seed;
    cfg.policy = slot_filling_policy(cfg.schema, cfg.info_slots, *cfg.closing_slot,
                                     "opening", "closing", "undefined", "waiting",
                                     "request_", "confirm_", "ack_");
    return cfg;
}

SyntheticConfig letsgo_like_config(std::size_t n_dialogs, std::uint64_t seed) {
    SyntheticConfig cfg;
    cfg.schema.name = "letsgo-like";
    cfg.schema.slots = {"route",         "origin", "destination", "time",
                        "date",          "schedule_type", "fare", "transfers",
                        "affirmation",   "farewell"};
    cfg.schema.system_acts = {
        "opening",        "closing",        "waiting",        "undefined",
        "request_route",  "request_origin", "request_destination", "request_time",
        "request_date",   "confirm_route",  "confirm_origin", "confirm_destination",
        "confirm_time",   "confirm_date",   "ack_schedule_type", "ack_fare",
        "ack_transfers",  "ack_affirmation", "help",          "repeat_query",
        "error",          "new_query",      "acceptance",     "rejection",
        "restart_prompt", "goodbye_ack"};
    cfg.info_slots = {0, 1, 2, 3, 4};
    cfg.closing_slot = 9;
    cfg.closing_act = "closing";
    cfg.n_dialogs = n_dialogs;
    cfg.confidence_noise = 0.45;
    cfg.p_silent_first = 0.4;
    cfg.p_idle = 0.3;
    cfg.p_volunteer = 0.08;
    cfg.p_bye = 0.7;
    cfg.seed = seed;
    cfg.policy = slot_filling_policy(cfg.schema, cfg.info_slots, *cfg.closing_slot,
                                     "opening", "closing", "undefined", "waiting",
                                     "request_", "confirm_", "ack_");
    return cfg;
}

SyntheticConfig dstc_like_config(std::size_t n_dialogs, std::uint64_t seed) {
    SyntheticConfig cfg;
    cfg.schema = dstc12_schema();
    cfg.info_slots = {0, 1, 2, 3, 4}; // route, from, to, date, time
    cfg.closing_act = "provide_schedule";
    cfg.n_dialogs = n_dialogs;
    cfg.confidence_noise = 0.35;
    cfg.p_silent_first = 0.35;
    cfg.p_idle = 0.2;
    cfg.p_volunteer = 0.12;
    cfg.seed = seed;
    const SlotSchema schema = cfg.schema;
    // slot indices in the bundled schema
    const std::size_t route = 0, from = 1, to = 2, date = 3, time = 4;
    const std::size_t nextbus = 7, prevbus = 8, repeat = 9, restart = 11;
    cfg.policy = [=](const std::vector<int>& codes) -> std::string {
        if (all_zero(codes)) return "hello";
        if (codes[from] == 2 && codes[to] == 0) return "confirm_from_request_to";
        if (codes[to] == 2 && codes[time] == 0) return "confirm_to_request_time";
        for (std::size_t slot : {route, from, to, date, time})
            if (codes[slot] == 2) return "confirm_" + schema.slots[slot];
        bool any_info_high = false;
        for (std::size_t slot : {route, from, to, date, time})
            any_info_high = any_info_high || codes[slot] == 1;
        if (!any_info_high) {
            if (codes[restart] == 1) return "restart";
            if (codes[repeat] == 1) return "repeat";
            if (codes[nextbus] == 1 || codes[prevbus] == 1) return "error";
        }
        for (std::size_t slot : {route, from, to, date, time})
            if (codes[slot] == 0) return "request_" + schema.slots[slot];
        return "provide_schedule";
    };
    return cfg;
}

} // namespace dm
