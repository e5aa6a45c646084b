#pragma once

#include <string>
#include <vector>

namespace vrc {

// Exit codes of the command-line front end.
enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitValidation = 2, kExitIo = 3 };

int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args[0] is the program name

}  // namespace vrc
