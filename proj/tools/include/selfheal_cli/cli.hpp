#pragma once

#include <iosfwd>

namespace selfheal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Parses argv, runs the requested subcommand and returns the exit code.
/// Normal output goes to `out`; diagnostics are a single line on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace selfheal::cli
