#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mdbell::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 2,
  kComputationError = 3,
};

/// Runs one command line (without the program name). Regular output goes to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Fixed 12-significant-digit rendering used in CSV and text output.
std::string format_number(double v);

}  // namespace mdbell::cli
