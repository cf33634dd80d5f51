#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace graphflow {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 runtime or check failure, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace graphflow
