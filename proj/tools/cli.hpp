#pragma once

#include <ostream>

namespace meeso::cli {

/// Entry point for `meeso search|pareto|eval`. Returns the process exit code:
/// 0 success, 1 runtime failure, 2 usage or validation error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace meeso::cli
