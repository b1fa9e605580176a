#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace ehs {

/// Tolerance for "this vector is a probability distribution" checks.
inline constexpr double kStochasticTol = 1e-12;

/// Parameters of a two-state bursty arrival process: `phi` is the long-run
/// arrival rate (stationary probability of the arrival state) and `b` the
/// mean length of a run of consecutive arrival slots.
struct BurstParams {
    double phi = 0.5;  ///< arrival rate, in (0, 1)
    double b = 1.0;    ///< mean burst length, >= 1

    /// p(0|1): probability of leaving the arrival state.
    double exit_prob() const { return 1.0 / b; }
    /// p(1|0): probability of entering the arrival state.
    double entry_prob() const { return phi / (b * (1.0 - phi)); }

    /// Throws std::invalid_argument when the pair does not define a valid
    /// two-state chain. Out-of-range values are rejected, never clamped.
    void validate() const;
};

/// Finite Markov chain as a row-stochastic transition matrix:
/// transition(i, j) = P(next = j | current = i).
struct FiniteChain {
    Eigen::MatrixXd transition;

    int n_states() const { return static_cast<int>(transition.rows()); }
    void validate() const;
};

/// Per-state emission distribution over unit counts. probs(s, e) is the
/// probability of emitting e units while in state s; column index doubles
/// as the emitted count, so supports are finite explicit lists.
struct EmissionDist {
    Eigen::MatrixXd probs;

    int n_states() const { return static_cast<int>(probs.rows()); }
    int max_units() const { return static_cast<int>(probs.cols()) - 1; }

    /// Point mass: state s always emits units(s).
    static EmissionDist point_mass(const std::vector<int>& units);

    void validate() const;
};

/// Builds the two-state chain with exit probability 1/b and entry
/// probability phi/(b(1-phi)). State 1 is the arrival state.
FiniteChain build_burst_chain(const BurstParams& params);

/// True when the positive-entry graph of `transition` is strongly connected.
bool is_irreducible(const Eigen::MatrixXd& transition);

namespace detail {
Eigen::VectorXd stationary_distribution_dense(const Eigen::MatrixXd& transition);
}

/// Stationary distribution of an irreducible chain, computed by a direct
/// linear solve of (P^T - I) pi = 0 with one equation replaced by the
/// normalization sum(pi) = 1. Accepts any dense Eigen expression.
/// Throws std::invalid_argument for reducible chains, std::runtime_error
/// when the solve does not reach residual <= 1e-12.
template <typename Derived>
Eigen::VectorXd stationary_distribution(const Eigen::MatrixBase<Derived>& transition) {
    return detail::stationary_distribution_dense(transition.derived());
}

Eigen::VectorXd stationary_distribution(const FiniteChain& chain);

/// Mean emitted units in the given state: sum_e e * f(e | state).
double expected_emission(const EmissionDist& dist, int state);

}  // namespace ehs
