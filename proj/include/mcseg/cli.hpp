#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcseg::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kData = 3,
  kConfig = 4,
};

/// Runs the command line `args` (args[0] is the program name). Results go to
/// files and `out`; timings and diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mcseg::cli
