#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coan {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitInternal = 3 };

/// Environment variable naming the default output root.
inline constexpr const char* kOutRootEnv = "COAN_OUT_ROOT";

/// Runs the command line `args` (without the program name). Data goes to
/// `out`, key=value log lines to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coan
