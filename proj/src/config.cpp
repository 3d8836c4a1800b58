#include "dm/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dm/error.hpp"

namespace dm {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_values(const std::string& s, int line) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw DataError("config line " + std::to_string(line) + ": empty value");
        out.push_back(item);
    }
    if (out.empty())
        throw DataError("config line " + std::to_string(line) + ": missing value");
    return out;
}

int to_int(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw DataError("config line " + std::to_string(line) + ": '" + s +
                    "' is not an integer");
}

double to_double(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw DataError("config line " + std::to_string(line) + ": '" + s +
                    "' is not a number");
}

std::uint64_t to_u64(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(s, &used);
        if (used == s.size()) return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
    }
    throw DataError("config line " + std::to_string(line) + ": '" + s +
                    "' is not an unsigned integer");
}

bool to_bool(const std::string& s, int line) {
    if (s == "on" || s == "true" || s == "1") return true;
    if (s == "off" || s == "false" || s == "0") return false;
    throw DataError("config line " + std::to_string(line) + ": '" + s +
                    "' is not on/off");
}

} // namespace

FileConfig parse_config(const std::string& text) {
    FileConfig config;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string stripped = raw.substr(0, raw.find('#'));
        stripped = trim(stripped);
        if (stripped.empty()) continue;
        std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw DataError("config line " + std::to_string(line) +
                            ": expected key = value");
        std::string key = trim(stripped.substr(0, eq));
        std::vector<std::string> values = split_values(stripped.substr(eq + 1), line);

        auto ints = [&](std::vector<int>& out) {
            for (const auto& v : values) out.push_back(to_int(v, line));
        };
        auto doubles = [&](std::vector<double>& out) {
            for (const auto& v : values) out.push_back(to_double(v, line));
        };
        auto strings = [&](std::vector<std::string>& out) {
            for (const auto& v : values) out.push_back(v);
        };

        if (key == "hidden_layers") ints(config.hidden_layers);
        else if (key == "width") ints(config.width);
        else if (key == "activation") strings(config.activation);
        else if (key == "lr") doubles(config.lr);
        else if (key == "batch") strings(config.batch);
        else if (key == "epochs") ints(config.epochs);
        else if (key == "dropout") doubles(config.dropout);
        else if (key == "context") ints(config.context);
        else if (key == "mode") strings(config.mode);
        else if (key == "threshold") doubles(config.threshold);
        else if (key == "include_prev_act") {
            for (const auto& v : values)
                config.include_prev_act.push_back(to_bool(v, line));
        } else if (key == "seed") {
            if (values.size() != 1)
                throw DataError("config line " + std::to_string(line) +
                                ": seed takes a single value");
            config.seed = to_u64(values.front(), line);
        } else {
            throw DataError("config line " + std::to_string(line) + ": unknown key '" +
                            key + "'");
        }
    }
    return config;
}

FileConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

} // namespace dm
