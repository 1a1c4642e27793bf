#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace relloc {

/// Exit codes of dispatch.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2 };

/// Runs the command line `args` (without the program name). Results go to
/// `out` (or the --out file), diagnostics and usage text to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relloc
