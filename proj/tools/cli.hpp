#pragma once

#include <iosfwd>

namespace emos::cli {

/// Exit codes of the command-line tool.
inline constexpr int kOk = 0;
inline constexpr int kInputError = 1;
inline constexpr int kNonConvergence = 2;

/// Runs one subcommand. argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace emos::cli
