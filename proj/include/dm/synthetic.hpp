#ifndef DM_SYNTHETIC_HPP
#define DM_SYNTHETIC_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dm/corpus.hpp"

namespace dm {

// Rollout recipe: a deterministic policy over dialog-register codes plus a
// simulated user that works towards filling the info slots. Labels are
// exactly the policy's choices, so a state lookup table reproduces them.
struct SyntheticConfig {
    SlotSchema schema;
    std::function<std::string(const std::vector<int>&)> policy;
    std::string closing_act;
    std::vector<std::size_t> info_slots;
    // Slot the user utters once the info slots are filled (farewell-style);
    // without one the policy is expected to close on info completion alone.
    std::optional<std::size_t> closing_slot;
    std::size_t n_dialogs = 0;

    double confidence_noise = 0.0; // chance a supplied value draws a low confidence
    double p_silent_first = 0.0;   // empty first observation (greeting only)
    double p_idle = 0.0;           // empty mid-dialog observation
    double p_extra = 0.0;          // second info slot in the same turn
    double p_volunteer = 0.0;      // mention of a non-info slot
    double p_bye = 0.8;            // chance per turn to utter the closing slot once done
    bool ordered_fill = false;     // fill info slots in schema order instead of randomly

    double threshold = 0.5;        // register threshold used during rollout
    int turn_cap = 50;
    std::uint64_t seed = 0;

    void check() const;
};

DialogCorpus generate_synthetic(const SyntheticConfig& config);

// 5 slots, 8 acts, random fill order. The workhorse for learnability checks.
SyntheticConfig demo_config(std::size_t n_dialogs, double noise, std::uint64_t seed);

// Fully deterministic dialogs in which every act occurs exactly once, so any
// subset of dialogs has exactly uniform label counts.
SyntheticConfig uniform_config(std::size_t n_dialogs, std::uint64_t seed);

// Profiles shaped after three published corpus statistics: slot/act counts
// match, and the user knobs are tuned towards the reported turns per dialog.
SyntheticConfig dihana_like_config(std::size_t n_dialogs, std::uint64_t seed);
SyntheticConfig letsgo_like_config(std::size_t n_dialogs, std::uint64_t seed);
SyntheticConfig dstc_like_config(std::size_t n_dialogs, std::uint64_t seed);

} // namespace dm

#endif
