#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mzi::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInternalError = 1,
  kConfigError = 2,
  kDegeneratePhysics = 3,
  kEnsembleFailure = 4,
};

/// Runs the command line `args` (args[0] is the program name) and returns the
/// process exit code. Results go to `out` unless an output file is named;
/// diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mzi::cli
