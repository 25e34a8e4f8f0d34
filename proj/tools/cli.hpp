#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace recgame::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerdictFail = 1;
inline constexpr int kExitInputError = 2;

// Runs one command line (args excludes the program name). Normal output goes
// to `out`, diagnostics to `err`; files named by --out options are written
// directly.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace recgame::cli
