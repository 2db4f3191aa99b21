#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mast {

/// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUser = 2;

/// Runs the `mast` command line (arguments without the program name) and
/// returns its exit status. Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mast
