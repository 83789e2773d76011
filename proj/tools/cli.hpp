/// @file cli.hpp
/// @brief Entry point of the pinchlab command-line tool.
#pragma once

#include <ostream>

namespace pinchlab::cli {

/// Exit codes: 0 success, 1 verification failure, 2 usage or config error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. Diagnostics go to `err`; outputs written to "-"
/// go to standard output.
int run(int argc, const char* const* argv, std::ostream& err);

}  // namespace pinchlab::cli
