#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace xolap {

/// Exit codes of the batch CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInvalidInput = 2,  ///< parse or validation error
  kExitOperator = 3,
  kExitOracleMismatch = 4,
};

/// Runs the `xolap` command line; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xolap
