#pragma once

#include "ehs/config.hpp"

#include <string>
#include <vector>

namespace ehs {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfigError = 2,
    kExitInfeasible = 3,
    kExitNumericalError = 4,
};

/// Solves the CMDP of `config` and writes policy.txt plus
/// solve_diagnostics.csv into `out_dir`. Returns an ExitCode.
int run_solve(const ExperimentConfig& config, const std::string& out_dir);

/// Simulates a previously solved policy under `config`: trace.csv for the
/// first run and one stats.csv row per run. The policy header hash must
/// match the config.
int run_simulate(const ExperimentConfig& config, const std::string& policy_path,
                 const std::string& out_dir);

/// Sweeps `param` ("phi_l" or "b_l") over `grid`; solves the constrained and
/// unconstrained variants per point, simulates both, and appends one CSV row
/// per (value, variant) to sweep.csv as results arrive.
int run_sweep(const ExperimentConfig& config, const std::string& param,
              const std::vector<double>& grid, const std::string& out_dir);

struct WalkGrid {
    std::vector<double> p_values = {0.5, 0.7, 0.9};
    std::vector<int> delta_max_values = {1, 3};
    long tau = 10000;
    long tau_short = 100;  ///< secondary horizon for the normality column
    long samples = 100000;
    std::uint64_t seed = 1;
};

/// Runs the persistent-walk validation over the grid and writes walk.csv
/// with predicted vs empirical variance and the normality statistics.
int run_validate_walk(const WalkGrid& grid, const std::string& out_dir);

}  // namespace ehs
