#pragma once

#include <string>
#include <vector>

namespace hexfem {

/// Entry point for the bpbench tool. Subcommands: run, sweep, verify,
/// quadcheck. Exit codes: 0 success, 1 verification failure, 2 usage error.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args);

}  // namespace hexfem
