#pragma once

#include "wavescat/config.hpp"

#include <string>

namespace wavescat {

enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitCache = 4 };

struct RunOptions {
    std::string out_dir;
    std::string cache_dir;
    int workers = 1;
    bool quiet = false;
};

// Each command writes into opts.out_dir and records its outputs in manifest.json there.
// A stage whose recorded outputs are intact for the same config hash is skipped.
int cmd_resonances(const ExperimentConfig& cfg, const RunOptions& opts);
int cmd_bank(const ExperimentConfig& cfg, const RunOptions& opts);
int cmd_gem(const ExperimentConfig& cfg, const RunOptions& opts);
int cmd_sem(const ExperimentConfig& cfg, const RunOptions& opts);
int cmd_compare(const ExperimentConfig& cfg, const RunOptions& opts);

// Command-line entry point; maps exceptions onto the exit codes above.
int run_cli(int argc, char** argv);

} // namespace wavescat
