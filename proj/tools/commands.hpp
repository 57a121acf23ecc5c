#ifndef WORMGAIT_TOOLS_COMMANDS_HPP
#define WORMGAIT_TOOLS_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace wormgait::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitModel = 3;

// Runs the command line `args` (without the program name). Diagnostics go to
// `err`, regular output to `out`. Returns the process exit status.
int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err);

} // namespace wormgait::cli

#endif
