#ifndef DM_CLI_HPP
#define DM_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace dm::cli {

// Runs one command-line invocation. args excludes the program name.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime failure.
int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err, std::istream& in);

} // namespace dm::cli

#endif
