#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace brownpoly {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitScientificFailure = 1,
    kExitConfigError = 2,
};

/// Runs the command line `args` (without the program name) and returns the
/// exit code. Human-readable progress goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Text of the built-in default configuration, in the same format accepted by --config.
std::string default_config_text();

} // namespace brownpoly
