#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rpid::cli {

// Exit codes: 0 success, 1 data or runtime error, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

// Runs one command line (args excludes the program name). Subcommands:
// generate, fit, score, evaluate.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rpid::cli
