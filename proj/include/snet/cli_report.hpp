#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace snet {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitInputError = 2, kExitResourceLimit = 3 };

// Entry point of the snet command line; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace snet
