#ifndef RCISPRT_CLI_HPP
#define RCISPRT_CLI_HPP

#include <ostream>

namespace rcisprt {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2 };

/// Entry point of the `rcisprt` tool. Results go to `out` unless --out is
/// given; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rcisprt

#endif  // RCISPRT_CLI_HPP
