#pragma once

// The bdmove command-line front end as a library, so the executable, the
// tests and the Python module share one code path.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bdm/config.hpp"

namespace bdm {

/// Process exit codes. Every command returns one of these; nothing escapes as an exception.
enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,     ///< unexpected failure outside the library's error codes
    kExitConfig = 2,       ///< bad invocation, unreadable or invalid configuration, failed bound probe
    kExitRuntime = 3,      ///< model error during the run, e.g. ThinningBoundViolated
    kExitCheckFailed = 4,  ///< a validation ran and rejected its hypothesis
    kExitInconclusive = 5, ///< the ergodicity certificate could not decide
};

struct CliArgs {
    Command command = Command::Simulate;
    std::string config_path;
    std::optional<std::string> out_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
};

/// Resolves the configuration, echoes it to out, runs the command and prints a
/// summary. With an output path the records go to that file and the resolved
/// configuration to "<out>.resolved.toml".
int run_command(const CliArgs& args, std::ostream& out, std::ostream& err);

/// Parses argv (program name first) and dispatches to run_command.
int cli_main(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

} // namespace bdm
