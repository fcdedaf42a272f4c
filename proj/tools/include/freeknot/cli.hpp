#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace freeknot::cli {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_numeric = 2 };

/// Runs one invocation. `args` excludes the program name, so
/// {"knot-stats", "--eps", "0.05"} is a complete command line. Summaries go
/// to `out`, diagnostics and usage text to `err`; CSV artifacts are written
/// below the output directory.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Output directory used when --out is absent: $FREEKNOT_OUT_DIR or ./out.
std::string default_output_dir();

}  // namespace freeknot::cli
