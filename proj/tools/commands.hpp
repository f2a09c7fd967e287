#pragma once

namespace aldi::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kIoError = 3,
    kPipelineError = 4,
};

/// Parses the command line, runs the chosen subcommand and returns the
/// process exit code. Diagnostics go to stderr.
int run(int argc, char** argv);

} // namespace aldi::cli
