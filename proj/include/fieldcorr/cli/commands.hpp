#pragma once

#include <string>
#include <vector>

#include "fieldcorr/cli/config.hpp"
#include "fieldcorr/stats.hpp"

namespace fieldcorr::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericError = 3, kVerifyFailed = 4 };

int cmd_simulate(RunConfig& cfg);
int cmd_transform(RunConfig& cfg);
int cmd_ar1_verify(RunConfig& cfg);
int cmd_fou(RunConfig& cfg);
int cmd_stats(RunConfig& cfg);

json report_to_json(const EnsembleReport& r);

/// Parses `args` (without the program name), runs the subcommand and maps
/// errors to exit codes. Diagnostics go to stderr.
int run_cli(const std::vector<std::string>& args);

}  // namespace fieldcorr::cli
