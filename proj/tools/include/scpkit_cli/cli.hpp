#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Entry point of the `scp` tool. `args` excludes the program name.
/// Subcommands: eval, mc, sweep, fit, verify, classify.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scp::cli
