#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spatel {

/// Process exit codes of the `spatel` tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitBestEffort = 2,
  kExitInputError = 3,
  kExitTimeLimit = 4,
};

/// Runs one command line (args[0] is the program name). Reports go to `out`,
/// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spatel
