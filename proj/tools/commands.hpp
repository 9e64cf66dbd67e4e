#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ml4c::cli {

/// Runs the command line `args` (args[0] is the program name). Returns the
/// process exit code: 0 success, 1 usage/config, 2 data error, 3 internal.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ml4c::cli
