#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qcm::app {

enum ExitCode : int {
  kSuccess = 0,
  kInvariantFailure = 1,
  kConfigError = 2,
  kTruncated = 3,
};

// Runs `qcm <command> <config.json> [flags]`. args excludes the program name.
// Reports go to the configured output file, or to `out` when none is set.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qcm::app
