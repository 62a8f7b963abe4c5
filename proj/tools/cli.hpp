#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sgn::cli {

/// Runs one command line (without the program name) and returns the exit
/// code: 0 success, 1 I/O or internal failure, 2 usage/validation,
/// 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sgn::cli
