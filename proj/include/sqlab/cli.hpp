#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sqlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNoConvergence = 3;

/// Runs one subcommand. `args` excludes the program name. Results go to
/// `out`; diagnostics go to `err` as one JSON object per line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sqlab::cli
