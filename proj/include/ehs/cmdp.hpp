#pragma once

#include "ehs/aging.hpp"
#include "ehs/lp.hpp"
#include "ehs/system.hpp"

#include <array>
#include <iosfwd>
#include <string>

namespace ehs {

/// Steady-state joint distribution over (state, action), flattened with
/// actions fastest. The LP's decision variables.
struct OccupationMeasure {
    Eigen::VectorXd x;
    int n_states = 0;
    int n_actions = 0;

    double at(long z, int a) const { return x(z * n_actions + a); }
    double total_mass() const { return x.sum(); }
    double min_entry() const { return x.minCoeff(); }
    /// max_z | sum_a x(z,a) - sum_{z',a} x(z',a) p(z|z',a) |
    double balance_residual(const Kernel& kernel) const;
};

/// Randomized stationary policy: one action distribution per state.
struct Policy {
    Eigen::MatrixXd action_probs;  ///< n_states x n_actions

    int n_states() const { return static_cast<int>(action_probs.rows()); }
    int n_actions() const { return static_cast<int>(action_probs.cols()); }
    long n_randomized_states(double tol = 1e-9) const;
    void validate() const;
};

/// Long-run averages of a policy computed analytically from the stationary
/// distribution of the induced chain.
struct PolicyAverages {
    double objective = 0.0;
    std::array<double, 4> constraint{0.0, 0.0, 0.0, 0.0};
};

enum class CmdpStatus { kOptimal, kInfeasible, kUnbounded };

struct CmdpDiagnostics {
    double objective = 0.0;               ///< LP optimum
    std::array<double, 4> achieved{};     ///< occupation-weighted constraint costs
    std::array<double, 4> bounds{};
    std::array<bool, 4> binding{};        ///< |achieved - bound| <= 1e-6
    long lp_iterations = 0;
    long randomized_states = 0;
    long initial_state = 0;               ///< mode of the occupation measure
    bool recurrent_class_reached = false; ///< warm-up rollout lands in the support of x
    std::string message;                  ///< infeasibility report when applicable
    std::array<double, 4> min_achievable{};  ///< per-bound minima (infeasible path only)
};

struct CmdpResult {
    CmdpStatus status = CmdpStatus::kInfeasible;
    Policy policy;
    OccupationMeasure occupation;
    CmdpDiagnostics diagnostics;
};

/// Assembles the occupation-measure linear program: one balance equality per
/// state, the normalization row, and one inequality per finite bound.
/// Column (z, a) sits at index z * n_actions + a.
LpProblem build_lp(const Kernel& kernel, const CostSpec& costs, const AgingBounds& bounds);

/// mu(a|z) = x(z,a) / sum_a x(z,a); states with no occupation mass fall back
/// to a point mass on `fallback_action` (the idle action by default).
Policy extract_policy(const OccupationMeasure& x, int fallback_action = 0);

/// Stationary distribution of the chain induced by `policy` on `kernel`,
/// solved directly with a normalization row. Throws std::runtime_error when
/// the solve does not converge (e.g. several recurrent classes).
Eigen::VectorXd stationary_distribution(const Policy& policy, const Kernel& kernel);

/// Analytic long-run averages from `initial_state`: the solve restricts the
/// chain to the states reachable under the policy, so states the fallback
/// rule made absorbing elsewhere cannot interfere. Throws when the reachable
/// part still has no unique stationary distribution.
PolicyAverages evaluate_policy(const Policy& policy, const Kernel& kernel, const CostSpec& costs,
                               long initial_state = 0);

/// build_lp + solve + extract_policy, with diagnostics. Infeasible bound
/// sets come back as a status carrying the per-bound minimum achievable
/// values so the caller can see which bound is unattainable.
CmdpResult solve_cmdp(const Kernel& kernel, const CostSpec& costs, const AgingBounds& bounds,
                      const SimplexOptions& options = {});

/// Text serialization: a header with the state-ordering convention, the
/// owning config hash, and the recommended initial state, then one
/// "state action probability" row per nonzero.
void write_policy(const Policy& policy, std::ostream& out, const std::string& config_hash,
                  long initial_state = 0);
Policy read_policy(std::istream& in, std::string* config_hash = nullptr,
                   long* initial_state = nullptr);

}  // namespace ehs
