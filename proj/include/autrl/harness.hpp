#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "autrl/autrl.hpp"
#include "autrl/envs.hpp"

namespace autrl {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string env_name;
    AutRlConfig autrl;
    int num_runs = 30;
    uint64_t base_seed = 1;
    std::string out_dir = "out";
    int jobs = 0;  // 0 = available parallelism
};

// Per-environment default hyperparameters.
ExperimentConfig default_experiment_config(const std::string& env_name);

// Loads and validates a key-value config file. Unknown keys are fatal and
// reported with their line number; unset keys fall back to the environment's
// defaults.
ExperimentConfig load_config(const std::string& path);

struct AggregatePoint {
    double env_steps = 0.0;  // mean cumulative training steps across runs
    double mean = 0.0;       // mean greedy reward across runs
    double ci95 = 0.0;       // 1.96 * standard error (0 for a single run)
};

struct ExperimentResult {
    std::vector<AutRlResult> runs;
    std::vector<AggregatePoint> curve;
    std::string out_dir;  // resolved output directory
};

// Executes num_runs seeded runs (seeds base_seed .. base_seed+num_runs-1) in
// a worker pool and writes run_<i>.csv / run_<i>.dfa / run_<i>.dot plus
// aggregate.csv. Output is byte-for-byte deterministic given the config. The
// AUTRL_OUT environment variable overrides the output directory.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Subcommands: run, learn-dfa, eval, export-dot.
int cli_main(int argc, char** argv);

}  // namespace autrl
