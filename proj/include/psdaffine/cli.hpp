#ifndef PSDAFFINE_CLI_HPP
#define PSDAFFINE_CLI_HPP

#include <ostream>

namespace psdaffine {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitInput = 2 };

/// Runs the command-line tool with the given arguments; tables go to `out`,
/// reports of failures to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace psdaffine

#endif  // PSDAFFINE_CLI_HPP
