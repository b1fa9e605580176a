// Independent reference implementations used only by tests: a brute-force
// vertex enumerator for small LPs, relative value iteration, and exhaustive
// deterministic-policy evaluation for small average-cost problems. None of
// them share code with the solver paths they check.
#pragma once

#include "ehs/lp.hpp"
#include "ehs/system.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracles {

struct EnumerationResult {
    bool feasible = false;
    double objective = std::numeric_limits<double>::infinity();
};

/// Enumerates every basic solution of the LP (slacks included), keeps the
/// feasible ones, and returns the best objective. Dependent rows are dropped
/// up front so rank-deficient systems still have full-size bases; candidate
/// points are always checked against the complete constraint set.
/// Exponential; keep the instances small.
inline EnumerationResult enumerate_vertices(const ehs::LpProblem& problem, double feas_tol = 1e-9) {
    const long n_struct = problem.n_vars();
    const long n_eq = problem.n_eq();
    const long n_ineq = problem.n_ineq();
    const long m = n_eq + n_ineq;
    const long n = n_struct + n_ineq;

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, n);
    if (n_eq > 0) a.topLeftCorner(n_eq, n_struct) = Eigen::MatrixXd(problem.eq_matrix);
    if (n_ineq > 0) {
        a.bottomLeftCorner(n_ineq, n_struct) = Eigen::MatrixXd(problem.ineq_matrix);
        a.bottomRightCorner(n_ineq, n_ineq).setIdentity();
    }
    Eigen::VectorXd b(m);
    b.head(n_eq) = problem.eq_rhs;
    b.tail(n_ineq) = problem.ineq_rhs;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    c.head(n_struct) = problem.objective;

    // Greedy maximal independent row subset.
    std::vector<long> rows;
    {
        Eigen::MatrixXd stacked(m, n);
        long count = 0;
        for (long i = 0; i < m; ++i) {
            stacked.row(count) = a.row(i);
            const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(
                stacked.topRows(count + 1).transpose());
            if (qr.rank() == count + 1) {
                rows.push_back(i);
                ++count;
            }
        }
    }
    const long r = static_cast<long>(rows.size());
    Eigen::MatrixXd a_red(r, n);
    Eigen::VectorXd b_red(r);
    for (long i = 0; i < r; ++i) {
        a_red.row(i) = a.row(rows[static_cast<std::size_t>(i)]);
        b_red(i) = b(rows[static_cast<std::size_t>(i)]);
    }

    EnumerationResult result;
    std::vector<long> pick(static_cast<std::size_t>(r));
    for (long i = 0; i < r; ++i) pick[static_cast<std::size_t>(i)] = i;

    Eigen::MatrixXd basis(r, r);
    Eigen::VectorXd x_full(n);
    while (true) {
        for (long i = 0; i < r; ++i) basis.col(i) = a_red.col(pick[static_cast<std::size_t>(i)]);
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
        if (lu.isInvertible()) {
            const Eigen::VectorXd xb = lu.solve(b_red);
            if ((xb.array() >= -feas_tol).all()) {
                x_full.setZero();
                for (long i = 0; i < r; ++i) x_full(pick[static_cast<std::size_t>(i)]) = xb(i);
                if ((a * x_full - b).cwiseAbs().maxCoeff() <= 1e-7) {
                    result.feasible = true;
                    result.objective = std::min(result.objective, c.dot(x_full));
                }
            }
        }
        // next combination of r column indices out of n
        long k = r - 1;
        while (k >= 0 && pick[static_cast<std::size_t>(k)] == n - r + k) --k;
        if (k < 0) break;
        ++pick[static_cast<std::size_t>(k)];
        for (long j = k + 1; j < r; ++j) {
            pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return result;
}

/// Optimal long-run average cost by relative value iteration on the damped
/// kernel p' = (1-alpha) I + alpha p, which shares every policy's gain with
/// the original and is aperiodic by construction.
inline double rvi_optimal_gain(const ehs::Kernel& kernel, const Eigen::VectorXd& cost,
                               double tol = 1e-11, long max_iterations = 2000000) {
    const long n = kernel.n_states;
    const double alpha = 0.5;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd w(n);

    for (long iteration = 0; iteration < max_iterations; ++iteration) {
        for (long z = 0; z < n; ++z) {
            double best = std::numeric_limits<double>::infinity();
            for (int a = 0; a < kernel.n_actions; ++a) {
                double q = cost(z * kernel.n_actions + a) + (1.0 - alpha) * v(z);
                for (const ehs::Kernel::Entry& entry : kernel.row(z, a)) {
                    q += alpha * entry.prob * v(entry.next);
                }
                best = std::min(best, q);
            }
            w(z) = best;
        }
        const Eigen::VectorXd diff = w - v;
        const double lo = diff.minCoeff();
        const double hi = diff.maxCoeff();
        v = w.array() - w(0);
        if (hi - lo < tol) return 0.5 * (hi + lo);
    }
    throw std::runtime_error("rvi_optimal_gain: no convergence");
}

/// Stationary distribution of a dense chain by the replaced-row solve.
/// Assumes a unique stationary distribution (irreducible input).
inline Eigen::VectorXd dense_stationary(const Eigen::MatrixXd& transition) {
    const long n = transition.rows();
    Eigen::MatrixXd system = transition.transpose() - Eigen::MatrixXd::Identity(n, n);
    system.row(0).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(0) = 1.0;
    Eigen::VectorXd pi = system.partialPivLu().solve(rhs);
    return pi / pi.sum();
}

/// Gain of one deterministic policy (action index per state).
inline double policy_gain(const ehs::Kernel& kernel, const Eigen::VectorXd& cost,
                          const std::vector<int>& actions) {
    const long n = kernel.n_states;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (long z = 0; z < n; ++z) {
        for (const ehs::Kernel::Entry& entry : kernel.row(z, actions[static_cast<std::size_t>(z)])) {
            p(z, entry.next) += entry.prob;
        }
    }
    const Eigen::VectorXd pi = dense_stationary(p);
    double gain = 0.0;
    for (long z = 0; z < n; ++z) {
        gain += pi(z) * cost(z * kernel.n_actions + actions[static_cast<std::size_t>(z)]);
    }
    return gain;
}

/// Minimum gain over all |A|^n deterministic policies. Every policy must
/// induce an irreducible chain (use strictly positive kernels).
inline double exhaustive_min_gain(const ehs::Kernel& kernel, const Eigen::VectorXd& cost) {
    const long n = kernel.n_states;
    std::vector<int> actions(static_cast<std::size_t>(n), 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        best = std::min(best, policy_gain(kernel, cost, actions));
        long z = 0;
        while (z < n) {
            if (++actions[static_cast<std::size_t>(z)] < kernel.n_actions) break;
            actions[static_cast<std::size_t>(z)] = 0;
            ++z;
        }
        if (z == n) break;
    }
    return best;
}

/// Random LP that is feasible by construction: equality rows pass through a
/// random non-negative point, inequality rows get slack above it. Objectives
/// are non-negative so the minimum is bounded.
template <typename Rng>
ehs::LpProblem random_feasible_lp(Rng& rng, long n, long m_eq, long m_in) {
    Eigen::MatrixXd a_eq(m_eq, n), a_in(m_in, n);
    Eigen::VectorXd x0(n), c(n);
    for (long j = 0; j < n; ++j) {
        x0(j) = rng.next_double() < 0.4 ? 0.0 : rng.next_double();
        c(j) = rng.next_double();
    }
    for (long i = 0; i < m_eq; ++i) {
        for (long j = 0; j < n; ++j) {
            a_eq(i, j) = rng.next_double() < 0.3 ? 0.0 : 2.0 * rng.next_double() - 1.0;
        }
    }
    for (long i = 0; i < m_in; ++i) {
        for (long j = 0; j < n; ++j) {
            a_in(i, j) = rng.next_double() < 0.3 ? 0.0 : 2.0 * rng.next_double() - 1.0;
        }
    }
    ehs::LpProblem problem;
    problem.objective = c;
    problem.eq_matrix = a_eq.sparseView();
    problem.eq_rhs = a_eq * x0;
    problem.ineq_matrix = a_in.sparseView();
    problem.ineq_rhs =
        a_in * x0 + Eigen::VectorXd::NullaryExpr(m_in, [&] { return 0.2 * rng.next_double(); });
    return problem;
}

/// Random kernel with strictly positive transition probabilities, so every
/// policy is unichain and aperiodic.
template <typename Rng>
ehs::Kernel random_dense_kernel(int n_states, int n_actions, Rng& rng) {
    ehs::Kernel kernel;
    kernel.n_states = n_states;
    kernel.n_actions = n_actions;
    kernel.rows.resize(static_cast<std::size_t>(n_states) * n_actions);
    for (auto& row : kernel.rows) {
        double total = 0.0;
        std::vector<double> weights(static_cast<std::size_t>(n_states));
        for (double& weight : weights) {
            weight = 0.05 + rng.next_double();
            total += weight;
        }
        row.resize(static_cast<std::size_t>(n_states));
        for (int z = 0; z < n_states; ++z) {
            row[static_cast<std::size_t>(z)] = {z, weights[static_cast<std::size_t>(z)] / total};
        }
    }
    return kernel;
}

}  // namespace oracles
