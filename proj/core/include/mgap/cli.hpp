#pragma once

#include <string>
#include <vector>

namespace mgap {

// Full command-line surface. Exit codes: 0 success, 1 usage error,
// 2 runtime error.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace mgap
