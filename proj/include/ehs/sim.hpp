#pragma once

#include "ehs/aging.hpp"
#include "ehs/cmdp.hpp"
#include "ehs/system.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace ehs {

/// Rollout controls. Warm-up defaults to 1% of the horizon, at least 10^3
/// slots, and never more than half the horizon; statistics cover the
/// remaining window.
struct SimOptions {
    long horizon = 10000;
    std::uint64_t seed = 1;
    long warmup = -1;  ///< -1 = automatic rule above
    int batches = 64;  ///< batch-means count for standard errors
    SystemState initial{};
    std::function<double(double)> objective = [](double y) { return y * y; };
};

/// Full per-slot record of one rollout.
struct Trace {
    std::vector<int> h, q, w, y_idx, l, lam, action, e, u;
    std::size_t size() const { return q.size(); }
};

/// A long-run average with its batch-means standard error.
struct AvgSe {
    double mean = 0.0;
    double se = 0.0;
};

/// Post-warm-up statistics of one rollout.
struct TraceStats {
    double q_mean = 0.0, q_std = 0.0;
    double w_mean = 0.0, w_std = 0.0;
    double saturation_frac = 0.0;  ///< share of slots with w == w_max
    double soc_avg = 0.0, soc_std = 0.0, soc_dev = 0.0;
    double degradation = 0.0;      ///< fade over the window
    DiscreteMetrics metrics;

    /// Slot averages aligned with the analytic policy costs: charge, cycle
    /// increment, step amplitude, persistent-move indicator, and objective.
    AvgSe avg_charge, avg_cycle_cost, avg_abs_delta, avg_persistence, avg_objective;

    long horizon = 0;
    long warmup = 0;
    std::uint64_t seed = 0;
};

/// Seeded closed-loop rollout of `policy` on `system`. Bit-reproducible for
/// a given (system, policy, options) tuple. Pass `trace` to capture the
/// per-slot records (warm-up included) and `action_counts` for the
/// state-by-action visit counts of the statistics window.
TraceStats simulate(const Policy& policy, const System& system, const BatteryConstants& constants,
                    const SimOptions& options, Trace* trace = nullptr,
                    Eigen::MatrixXd* action_counts = nullptr);

/// Persistent-walk experiment parameters: the next step repeats the previous
/// direction with probability p, with an integer amplitude drawn uniformly
/// from [1, delta_max].
struct WalkParams {
    double p = 0.5;
    int delta_max = 1;
    long tau = 10000;
    long samples = 100000;

    double mean_amplitude() const { return 0.5 * (1.0 + delta_max); }
    /// Variance the source model predicts for the tau-step displacement.
    double predicted_variance() const { return mean_amplitude() * tau * p / (1.0 - p); }
    void validate() const;
};

struct WalkReport {
    double empirical_mean = 0.0;
    double empirical_var = 0.0;   ///< sample variance of the displacement
    double predicted_var = 0.0;   ///< delta_bar * tau * p / (1 - p)
    double normality_stat = 0.0;  ///< KS distance to the moment-matched Gaussian
    long samples = 0;
    long tau = 0;
};

/// Simulates `samples` independent walks of length tau and compares the
/// displacement distribution against the predicted variance and a Gaussian
/// matched to the empirical moments.
WalkReport validate_walk(const WalkParams& params, std::uint64_t seed);

}  // namespace ehs
