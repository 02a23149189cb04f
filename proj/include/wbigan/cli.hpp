#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wbigan {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitRuntime = 3,
};

// Entry point of the `wbigan` tool. `args` excludes the program name.
// Subcommands: train, score, eval, sweep, bench, divergence-demo.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wbigan
