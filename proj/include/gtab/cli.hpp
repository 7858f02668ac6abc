#pragma once

#include <iosfwd>

namespace gtab {

/// Entry point of the `gtab` tool. Returns the process exit code: 0 success,
/// 1 input error, 2 numeric failure, 3 bridge failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gtab
