#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace voicebench::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kPartialFailure = 3,
};

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// VOICEBENCH_WORKERS when set and positive, else the hardware thread count.
unsigned default_workers();

}  // namespace voicebench::cli
