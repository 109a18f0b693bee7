#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace confmix::cli {

/// Runs one command line (without the program name) and returns the process exit code:
/// 0 success, 2 usage error, 3 data error, 4 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace confmix::cli
