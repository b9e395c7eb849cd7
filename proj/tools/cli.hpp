#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace deepwriter::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitUsage = 64;

/// Runs one command line (args[0] is the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace deepwriter::cli
