#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace signoise::cli {

/// Runs one command. `args` excludes the program name. Returns the process
/// exit code: 0 success, 1 data error, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace signoise::cli
