#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <vector>

namespace ehs {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

const char* to_string(LpStatus status);

/// min c'x  s.t.  Aeq x = beq,  Ain x <= bin,  x >= 0.
/// Constraint blocks are stored sparse; occupation-measure instances carry
/// only a handful of nonzeros per column.
struct LpProblem {
    Eigen::VectorXd objective;
    Eigen::SparseMatrix<double> eq_matrix;
    Eigen::VectorXd eq_rhs;
    Eigen::SparseMatrix<double> ineq_matrix;
    Eigen::VectorXd ineq_rhs;

    long n_vars() const { return objective.size(); }
    long n_eq() const { return eq_rhs.size(); }
    long n_ineq() const { return ineq_rhs.size(); }

    /// Throws std::invalid_argument on inconsistent dimensions or non-finite data.
    void validate() const;
};

struct LpSolution {
    LpStatus status = LpStatus::kInfeasible;
    Eigen::VectorXd x;           ///< structural variables (empty unless optimal)
    double objective = 0.0;
    Eigen::VectorXd eq_duals;    ///< multipliers for equality rows (optimal only)
    Eigen::VectorXd ineq_duals;  ///< multipliers for inequality rows (optimal only)
    long iterations = 0;

    // Residuals of the returned point against the original problem.
    double max_eq_residual = 0.0;
    double max_ineq_violation = 0.0;
    double min_x = 0.0;
};

struct SimplexOptions {
    double feas_tol = 1e-8;    ///< feasibility / phase-1 acceptance tolerance
    double pivot_tol = 1e-10;  ///< smallest admissible pivot magnitude
    double opt_tol = 1e-9;     ///< reduced-cost threshold for entering columns
    long refactor_every = 50;  ///< basis refactorization cadence (eta cap)
    long stall_limit = 0;      ///< stalled iterations before Bland's rule; 0 = automatic
    long max_iterations = 0;   ///< 0 = derive from problem size
    long log_every = 0;        ///< progress lines to stderr every N iterations; 0 = silent

    /// Structural columns to seed the initial basis with (one per equality
    /// row works best). The solver validates the hint and silently falls back
    /// to the textbook all-artificial start when it does not factorize.
    std::vector<long> crash_columns;
};

/// Two-phase revised simplex with a factorized sparse basis and product-form
/// updates. Deterministic: identical inputs produce identical solutions.
/// Infeasible and unbounded problems come back as statuses; only malformed
/// input or a numerical breakdown raises.
LpSolution solve(const LpProblem& problem, const SimplexOptions& options = {});

/// Writes the problem in CPLEX LP text format for external cross-checks.
void write_lp_format(const LpProblem& problem, std::ostream& out);

}  // namespace ehs
