#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ptorus::cli {

/// Parses args (without the program name), runs the subcommand and writes
/// its result to `out` (or to the --out file). Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ptorus::cli
