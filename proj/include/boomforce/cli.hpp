#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace boomforce {

// Stable exit-code contract of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,     // bad flags, unreadable or invalid config
  kExitDiverged = 2,
  kExitVerifyFailed = 3,
};

/// Entry point shared by the executable and the tests. args[0] is the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace boomforce
