#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dpmgarch {

/// Process exit codes.
enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_usage = 2, exit_data = 3, exit_numeric = 4 };

/// Entry point of the command-line tool; `args` excludes the program name.
/// Subcommands: simulate, estimate, predict, allocate, hedge, stats.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace dpmgarch
