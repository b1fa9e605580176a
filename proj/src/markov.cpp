#include "ehs/markov.hpp"

#include <cmath>
#include <string>

namespace ehs {

void BurstParams::validate() const {
    if (!(phi > 0.0 && phi < 1.0)) {
        throw std::invalid_argument("BurstParams: phi must lie in (0,1), got " + std::to_string(phi));
    }
    if (!(b >= 1.0)) {
        throw std::invalid_argument("BurstParams: b must be >= 1, got " + std::to_string(b));
    }
    if (entry_prob() > 1.0) {
        throw std::invalid_argument("BurstParams: phi/(b(1-phi)) = " + std::to_string(entry_prob()) +
                                    " exceeds 1; no two-state chain realizes this (phi, b) pair");
    }
}

void FiniteChain::validate() const {
    const auto n = transition.rows();
    if (n < 1 || transition.cols() != n) {
        throw std::invalid_argument("FiniteChain: transition matrix must be square and non-empty");
    }
    if ((transition.array() < 0.0).any() || (transition.array() > 1.0).any()) {
        throw std::invalid_argument("FiniteChain: transition entries must lie in [0,1]");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double row_sum = transition.row(i).sum();
        if (std::abs(row_sum - 1.0) > kStochasticTol) {
            throw std::invalid_argument("FiniteChain: row " + std::to_string(i) + " sums to " +
                                        std::to_string(row_sum) + ", not 1");
        }
    }
}

EmissionDist EmissionDist::point_mass(const std::vector<int>& units) {
    int max_u = 0;
    for (int u : units) {
        if (u < 0) throw std::invalid_argument("EmissionDist: unit counts must be non-negative");
        max_u = std::max(max_u, u);
    }
    EmissionDist dist;
    dist.probs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(units.size()), max_u + 1);
    for (std::size_t s = 0; s < units.size(); ++s) {
        dist.probs(static_cast<Eigen::Index>(s), units[s]) = 1.0;
    }
    return dist;
}

void EmissionDist::validate() const {
    if (probs.rows() < 1 || probs.cols() < 1) {
        throw std::invalid_argument("EmissionDist: must have at least one state and one support point");
    }
    if ((probs.array() < 0.0).any()) {
        throw std::invalid_argument("EmissionDist: probabilities must be non-negative");
    }
    for (Eigen::Index s = 0; s < probs.rows(); ++s) {
        const double row_sum = probs.row(s).sum();
        if (std::abs(row_sum - 1.0) > kStochasticTol) {
            throw std::invalid_argument("EmissionDist: state " + std::to_string(s) +
                                        " distribution sums to " + std::to_string(row_sum));
        }
    }
}

FiniteChain build_burst_chain(const BurstParams& params) {
    params.validate();
    const double p01 = params.exit_prob();
    const double p10 = params.entry_prob();
    FiniteChain chain;
    chain.transition = Eigen::MatrixXd(2, 2);
    chain.transition << 1.0 - p10, p10,
                        p01, 1.0 - p01;
    chain.validate();
    return chain;
}

bool is_irreducible(const Eigen::MatrixXd& transition) {
    const int n = static_cast<int>(transition.rows());
    auto reaches_all = [&](bool forward) {
        std::vector<char> seen(n, 0);
        std::vector<int> stack = {0};
        seen[0] = 1;
        int count = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int u = 0; u < n; ++u) {
                const double p = forward ? transition(v, u) : transition(u, v);
                if (p > 0.0 && !seen[u]) {
                    seen[u] = 1;
                    ++count;
                    stack.push_back(u);
                }
            }
        }
        return count == n;
    };
    return reaches_all(true) && reaches_all(false);
}

namespace detail {

Eigen::VectorXd stationary_distribution_dense(const Eigen::MatrixXd& transition) {
    FiniteChain probe{transition};
    probe.validate();
    if (!is_irreducible(transition)) {
        throw std::invalid_argument("stationary_distribution: chain is reducible");
    }
    const auto n = transition.rows();

    // (P^T - I) pi = 0 has a one-dimensional null space for an irreducible
    // chain and its rows sum to zero, so any single equation may be replaced
    // by the normalization without losing information.
    Eigen::MatrixXd system = transition.transpose() - Eigen::MatrixXd::Identity(n, n);
    system.row(0).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(0) = 1.0;

    Eigen::VectorXd pi = system.partialPivLu().solve(rhs);
    pi /= pi.sum();

    const double residual = (transition.transpose() * pi - pi).cwiseAbs().maxCoeff();
    if (!(residual <= 1e-12)) {
        throw std::runtime_error("stationary_distribution: residual " + std::to_string(residual) +
                                 " exceeds 1e-12");
    }
    return pi;
}

}  // namespace detail

Eigen::VectorXd stationary_distribution(const FiniteChain& chain) {
    return detail::stationary_distribution_dense(chain.transition);
}

double expected_emission(const EmissionDist& dist, int state) {
    if (state < 0 || state >= dist.n_states()) {
        throw std::invalid_argument("expected_emission: state " + std::to_string(state) +
                                    " out of range [0," + std::to_string(dist.n_states()) + ")");
    }
    double mean = 0.0;
    for (Eigen::Index e = 0; e < dist.probs.cols(); ++e) {
        mean += static_cast<double>(e) * dist.probs(state, e);
    }
    return mean;
}

}  // namespace ehs
