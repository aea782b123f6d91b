#pragma once

#include <ostream>

namespace fbqos::cli {

enum exit_code : int {
    exit_ok = 0,
    exit_unexpected = 1,
    exit_config = 2,
    exit_precondition = 3,
    exit_numeric = 4,
};

// Parses argv (argv[0] is the program name), runs one subcommand and returns
// the process exit code. Diagnostics go to `err`, a short summary to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fbqos::cli
