#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gtt {

/// Entry point of the `gtt` tool. Exit codes: 0 success, 1 user error,
/// 2 internal error. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gtt
