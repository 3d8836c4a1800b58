#ifndef DM_CONFIG_HPP
#define DM_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dm {

// Parsed `key = value[, value...]` configuration file. Every axis is a list;
// a single value is a list of one, multiple values span a sweep. Unset axes
// stay empty and the caller falls back to preset/flag values.
struct FileConfig {
    std::vector<int> hidden_layers;
    std::vector<int> width;
    std::vector<std::string> activation;
    std::vector<double> lr;
    std::vector<std::string> batch; // per_sample | per_epoch | positive size
    std::vector<int> epochs;
    std::vector<double> dropout;
    std::optional<std::uint64_t> seed;
    std::vector<int> context;
    std::vector<std::string> mode;
    std::vector<double> threshold;
    std::vector<bool> include_prev_act;

    bool has_network_axis() const {
        return !hidden_layers.empty() || !width.empty() || !activation.empty() ||
               !lr.empty() || !batch.empty() || !epochs.empty() || !dropout.empty();
    }
};

// '#' starts a comment; blank lines are skipped; unknown keys are data errors.
FileConfig parse_config(const std::string& text);
FileConfig load_config(const std::filesystem::path& path);

} // namespace dm

#endif
