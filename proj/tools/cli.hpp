#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gdl::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationError = 1,
  kIoError = 2,
  kEstimationImpossible = 3,
};

inline constexpr int kFormatVersion = 1;
inline constexpr unsigned long long kDefaultSeed = 20210105;

// Runs one command line (without the program name). Reports go to `out`
// unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gdl::cli
