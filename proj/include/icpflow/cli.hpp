#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace icpflow {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadInput = 2;   // malformed file or length mismatch
inline constexpr int kExitBadConfig = 3;  // config or scene spec rejected

/**
 * Entry point for the `icpflow` tool: estimate, track, evaluate and synth
 * subcommands. `args` excludes the program name. Reports go to `out`,
 * diagnostics to `err`.
 */
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace icpflow
