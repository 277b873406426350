#pragma once

#include <string>
#include <vector>

namespace satorb::cli {

// Parses args (without the program name) and runs the subcommand. Errors
// propagate as satorb exceptions; main maps them onto exit codes.
int run(const std::vector<std::string>& args);

} // namespace satorb::cli
