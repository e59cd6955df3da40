#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace preflab::app {

/// Parses `args` (without the program name), runs one subcommand and
/// returns its exit code. Errors are reported on `err`, never thrown.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace preflab::app
