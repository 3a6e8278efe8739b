// Command-line entry point. Exit codes: 0 success, 2 usage or input error,
// 3 numerical failure (and replay mismatches).
#ifndef SMF_CLI_CLI_HPP
#define SMF_CLI_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace smf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNumerical = 3;

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace smf::cli

#endif  // SMF_CLI_CLI_HPP
