#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ebm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInternal = 4;

/// Runs the command line `args` (args[0] is the program name). Data goes to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err);

} // namespace ebm::cli
