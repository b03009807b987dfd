#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mindstone::cli {

/// Runs one `mindstone` invocation. `args` excludes the program name.
/// Returns 0 on success, 2 on usage errors and 1 on runtime errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mindstone::cli
