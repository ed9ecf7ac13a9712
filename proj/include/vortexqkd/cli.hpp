#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vortexqkd {

/// Entry point of the `vortexqkd` tool. Returns the process exit code:
/// 0 success, 2 validation failure, 3 numeric/model error or failed check,
/// 4 I/O error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vortexqkd
