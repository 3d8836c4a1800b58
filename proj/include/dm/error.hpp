#ifndef DM_ERROR_HPP
#define DM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace dm {

// Problems with input data (malformed corpus files, schema violations,
// out-of-range confidences). The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Failures during a run that are not the caller's data (divergent training,
// unreachable closing act, ...). The CLI maps these to exit code 3.
class RuntimeFailure : public std::runtime_error {
public:
    explicit RuntimeFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dm

#endif
