#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rmteed::cli {

/// Runs one command line (without the program name). Returns 0 on success, 1 on usage, input
/// or contract errors, 2 on numerical failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Expands `--config file.json` into flags placed after the subcommand name. Flags already on
/// the command line take precedence over the file.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace rmteed::cli
