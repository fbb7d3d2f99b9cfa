#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gmmd::cli {

// Exit codes: 0 completed, 2 invalid input or degenerate data, 1 internal failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInvalid = 2;

// Runs one command line (args[0] is the program name). Reports go to `out`,
// machine-readable errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gmmd::cli
