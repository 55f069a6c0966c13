#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kglab::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kOracleMismatch = 3,
  kViolation = 4,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kglab::cli
