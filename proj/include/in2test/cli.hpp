#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace in2test {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitMonitorFailed = 2;

/// Runs the command line `args` (without the program name). Normal output
/// goes to `out`, diagnostics to `err`; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace in2test
