#pragma once

#include <iosfwd>

namespace semoran::harness {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,   // bad flags or config
  kExitInput = 3,   // missing or malformed input files
  kExitFailed = 4,  // training, simulation or output validation failed
};

/// Entry point of the `semoran` tool. Progress goes to `log`, the one-line
/// JSON summary (or structured error) to `out` / `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::ostream& log);

}  // namespace semoran::harness
