#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace epibsl {

enum ExitCode : int {
    kExitOk = 0,
    kExitError = 1,
    kExitConfig = 2,
    kExitVerifyFailed = 3,
};

/// Runs the command line `args` (args[0] is the program name). Human-readable output goes
/// to `out`, diagnostics to `err`; result files go under --out.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace epibsl
