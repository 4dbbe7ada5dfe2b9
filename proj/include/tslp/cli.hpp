#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tslp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBudget = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitData = 65;
inline constexpr int kExitNumeric = 70;

/// Runs one command line (args[0] is the program name). Results go to `out`
/// unless an output path was given; diagnostics go to `err`. Returns the
/// process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tslp::cli
