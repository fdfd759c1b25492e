#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bwgame::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitConvergence = 2;

/// Runs the command line `args` (without the program name). Results go to
/// `out` unless --output redirects them; messages go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bwgame::cli
