#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace holespin::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

/// Runs the tool on `args` (without the program name). Primary output goes
/// to `out` unless --output is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace holespin::cli
