#pragma once

#include "ehs/system.hpp"

#include <array>
#include <functional>
#include <limits>

namespace ehs {

/// Closed-form degradation model constants. The upstream literature keeps
/// the physical values behind a paywall of lab fits, so these are mandatory
/// configuration; the repository ships an illustrative profile only.
struct BatteryConstants {
    double a_coef = 1.0;  ///< cycle-count weight
    double b_coef = 1.0;  ///< deviation exponent scale
    double c_coef = 1.0;  ///< overall scale
    double d_coef = 1.0;  ///< mean-SoC exponent scale
    double t_life = 1e6;  ///< shelf life, in slots
    double q_nom = 8.0;   ///< nominal capacity, in energy units

    void validate() const;
};

/// Upper bounds for the four long-run average costs. Infinity disables the
/// corresponding constraint entirely (the row is never emitted).
struct AgingBounds {
    static constexpr double kUnbounded = std::numeric_limits<double>::infinity();

    /// [0] mean charge, [1] cycle rate, [2] step amplitude, [3] persistence.
    std::array<double, 4> c_hat{kUnbounded, kUnbounded, kUnbounded, kUnbounded};

    static AgingBounds unconstrained() { return AgingBounds{}; }
    bool is_finite(int k) const { return std::isfinite(c_hat[static_cast<std::size_t>(k)]); }
    int n_finite() const;
    void validate() const;
};

/// Cost-construction switches. `normalize_cycles` keeps the 1/(2 q_nom)
/// factor in the cycle cost so its bound is expressed in cycles per slot;
/// disabling it reproduces the raw throughput average instead.
/// `action_tie_break` adds a tiny |a| term to the objective so that among
/// delay-equivalent optima the solver lands on the one that idles instead of
/// discharging pointlessly, the conventional tie-break of value-iteration
/// solvers. The default sits orders of magnitude below every reported
/// tolerance; set it to zero for the untouched objective.
struct CostOptions {
    std::function<double(double)> objective = [](double y) { return y * y; };
    bool normalize_cycles = true;
    double action_tie_break = 1e-6;
};

/// Per-(state, action) objective and constraint costs, flattened in the same
/// (state-major, action-fastest) order the LP columns use.
struct CostSpec {
    Eigen::VectorXd objective;
    std::array<Eigen::VectorXd, 4> constraint;

    long n_state_actions() const { return objective.size(); }
};

/// Objective cost of a state: f applied to the smoothed-backlog grid value.
double objective_cost(const SystemConfig& config, const SystemState& z,
                      const CostOptions& options = {});

/// The four constraint costs of one (state, action):
///   d1 = charge level,
///   d2 = (|a| + E[arrivals | h]) / (2 q_nom)       (cycle increment),
///   d3 = E[|q' - q|]  over the kernel row          (step amplitude),
///   d4 = P(q' != q and lam' == lam) over the row   (persistent move).
std::array<double, 4> constraint_costs(const System& system, const StateSpace& space,
                                       const Kernel& kernel, const BatteryConstants& constants,
                                       long state_index, int action_index,
                                       const CostOptions& options = {});

/// Vectorizes objective_cost and constraint_costs over the whole space.
CostSpec build_cost_spec(const System& system, const StateSpace& space, const Kernel& kernel,
                         const BatteryConstants& constants, const CostOptions& options = {});

namespace detail {
/// Degradation from sufficient statistics of a window of T slots:
/// soc mean, population variance of soc, and total cycle count.
double degrade_from_moments(double soc_avg, double soc_var, double n_cyc, double horizon,
                            const BatteryConstants& constants);
}

/// Degradation fraction of a window: mean SoC, the 2*sqrt(3*var) deviation
/// measure, and throughput-counted cycles feed the exponential fade model.
/// `soc` must lie in [0,1]; `throughput` holds |a| + |e| per slot.
template <typename D1, typename D2>
double degrade_trace(const Eigen::DenseBase<D1>& soc, const Eigen::DenseBase<D2>& throughput,
                     const BatteryConstants& constants) {
    constants.validate();
    const auto T = soc.size();
    if (T != throughput.size()) throw std::invalid_argument("degrade_trace: trace lengths differ");
    if (T < 2) throw std::invalid_argument("degrade_trace: need at least two slots");
    const Eigen::ArrayXd soc_arr = soc.derived().template cast<double>().array();
    if ((soc_arr < -1e-12).any() || (soc_arr > 1.0 + 1e-12).any()) {
        throw std::invalid_argument("degrade_trace: SoC values must lie in [0,1]");
    }
    const double soc_avg = soc_arr.mean();
    const double soc_var = (soc_arr - soc_avg).square().mean();
    const double n_cyc =
        throughput.derived().template cast<double>().array().abs().sum() / (2.0 * constants.q_nom);
    return detail::degrade_from_moments(soc_avg, soc_var, n_cyc, static_cast<double>(T), constants);
}

/// Windowed trace statistics in battery units: mean charge, variance,
/// cycle count, mean step amplitude, and the persistence score.
struct DiscreteMetrics {
    double q_mu = 0.0;
    double q_sigma2 = 0.0;
    double n_cyc = 0.0;
    double delta_bar = 0.0;
    double v_bar = 0.0;
};

/// Computes the metrics on aligned traces of equal length T >= 2. Flat slots
/// extend neither a charging nor a discharging phase: they score zero in
/// v_bar and the direction flag is retained across them.
DiscreteMetrics discrete_metrics(const std::vector<int>& q_trace, const std::vector<int>& a_trace,
                                 const std::vector<int>& e_trace, double q_nom);

}  // namespace ehs
