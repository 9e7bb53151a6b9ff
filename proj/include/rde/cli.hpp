#pragma once

#include <string>
#include <vector>

namespace rde::cli {

/// Runs one CLI invocation (args exclude the program name). Exit codes:
/// 0 ok, 1 validation error, 2 runtime error, 3 verification failure.
int run(const std::vector<std::string>& args);

}  // namespace rde::cli
