#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace swb {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 1;
inline constexpr int kExitInternalError = 2;

// Runs one command line (without the program name). User errors print a
// single "error: ..." line to err and return kExitUserError.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace swb
