#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace orderk::cli {

enum ExitCode : int { kOk = 0, kFail = 1, kUsage = 2, kMissingConstant = 3, kBias = 4 };

// Runs one command line (without the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace orderk::cli
