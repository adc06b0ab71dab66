#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace symplane::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kParseFailure = 2,
  kRenderFailure = 3,
  kPairingFailure = 4,
  kNoVertexFeatures = 5,
  kMissingGroundTruth = 6,
  kUsage = 64,
};

// Runs one invocation; args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace symplane::cli
