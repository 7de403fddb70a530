#ifndef PARAGRAM_TOOLS_CLI_HPP_
#define PARAGRAM_TOOLS_CLI_HPP_

#include <iosfwd>
#include <span>
#include <string>

namespace paragram::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Runs `paragram <subcommand> [flags]`; `args` excludes the program name.
// Reports go to `out`, diagnostics to `err`.
int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace paragram::cli

#endif  // PARAGRAM_TOOLS_CLI_HPP_
