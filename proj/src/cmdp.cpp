#include "ehs/cmdp.hpp"

#include "ehs/rng.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ehs {

double OccupationMeasure::balance_residual(const Kernel& kernel) const {
    Eigen::VectorXd flow = Eigen::VectorXd::Zero(n_states);
    for (long z = 0; z < n_states; ++z) {
        for (int a = 0; a < n_actions; ++a) {
            const double mass = x(z * n_actions + a);
            flow(z) += mass;
            if (mass == 0.0) continue;
            for (const Kernel::Entry& entry : kernel.row(z, a)) {
                flow(entry.next) -= mass * entry.prob;
            }
        }
    }
    return flow.cwiseAbs().maxCoeff();
}

long Policy::n_randomized_states(double tol) const {
    long count = 0;
    for (Eigen::Index z = 0; z < action_probs.rows(); ++z) {
        int support = 0;
        for (Eigen::Index a = 0; a < action_probs.cols(); ++a) {
            if (action_probs(z, a) > tol) ++support;
        }
        if (support > 1) ++count;
    }
    return count;
}

void Policy::validate() const {
    if (action_probs.rows() < 1 || action_probs.cols() < 1) {
        throw std::invalid_argument("Policy: empty table");
    }
    if ((action_probs.array() < -1e-9).any()) {
        throw std::invalid_argument("Policy: negative action probability");
    }
    for (Eigen::Index z = 0; z < action_probs.rows(); ++z) {
        const double row_sum = action_probs.row(z).sum();
        if (std::abs(row_sum - 1.0) > 1e-9) {
            throw std::invalid_argument("Policy: row " + std::to_string(z) + " sums to " +
                                        std::to_string(row_sum));
        }
    }
}

LpProblem build_lp(const Kernel& kernel, const CostSpec& costs, const AgingBounds& bounds) {
    bounds.validate();
    const long n_states = kernel.n_states;
    const int n_actions = kernel.n_actions;
    const long n = n_states * n_actions;
    if (costs.n_state_actions() != n) {
        throw std::invalid_argument("build_lp: cost vectors sized " +
                                    std::to_string(costs.n_state_actions()) + ", kernel needs " +
                                    std::to_string(n));
    }

    LpProblem problem;
    problem.objective = costs.objective;

    // Balance rows plus the normalization row. Column (z,a) contributes +1 to
    // its own state's row, -p(z'|z,a) to each successor row, and 1 to the
    // normalization row; the balance block is rank-deficient by one, which
    // the solver tolerates.
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(n) * 8);
    for (long z = 0; z < n_states; ++z) {
        for (int a = 0; a < n_actions; ++a) {
            const long col = z * n_actions + a;
            double self_correction = 0.0;
            for (const Kernel::Entry& entry : kernel.row(z, a)) {
                if (entry.next == z) {
                    self_correction += entry.prob;
                } else {
                    triplets.emplace_back(static_cast<int>(entry.next), static_cast<int>(col),
                                          -entry.prob);
                }
            }
            triplets.emplace_back(static_cast<int>(z), static_cast<int>(col),
                                  1.0 - self_correction);
            triplets.emplace_back(static_cast<int>(n_states), static_cast<int>(col), 1.0);
        }
    }
    problem.eq_matrix.resize(n_states + 1, n);
    problem.eq_matrix.setFromTriplets(triplets.begin(), triplets.end());
    problem.eq_rhs = Eigen::VectorXd::Zero(n_states + 1);
    problem.eq_rhs(n_states) = 1.0;

    std::vector<Eigen::Triplet<double>> ineq_triplets;
    std::vector<double> ineq_rhs;
    for (int k = 0; k < 4; ++k) {
        if (!bounds.is_finite(k)) continue;
        const int row = static_cast<int>(ineq_rhs.size());
        const Eigen::VectorXd& d = costs.constraint[static_cast<std::size_t>(k)];
        for (long col = 0; col < n; ++col) {
            if (d(col) != 0.0) ineq_triplets.emplace_back(row, static_cast<int>(col), d(col));
        }
        ineq_rhs.push_back(bounds.c_hat[static_cast<std::size_t>(k)]);
    }
    problem.ineq_matrix.resize(static_cast<long>(ineq_rhs.size()), n);
    problem.ineq_matrix.setFromTriplets(ineq_triplets.begin(), ineq_triplets.end());
    problem.ineq_rhs = Eigen::Map<const Eigen::VectorXd>(ineq_rhs.data(),
                                                         static_cast<long>(ineq_rhs.size()));
    return problem;
}

Policy extract_policy(const OccupationMeasure& occupation, int fallback_action) {
    const long n_states = occupation.n_states;
    const int n_actions = occupation.n_actions;
    if (fallback_action < 0 || fallback_action >= n_actions) {
        throw std::invalid_argument("extract_policy: fallback action out of range");
    }
    Policy policy;
    policy.action_probs = Eigen::MatrixXd::Zero(n_states, n_actions);
    for (long z = 0; z < n_states; ++z) {
        double mass = 0.0;
        for (int a = 0; a < n_actions; ++a) mass += std::max(occupation.at(z, a), 0.0);
        if (mass > 1e-12) {
            double kept = 0.0;
            for (int a = 0; a < n_actions; ++a) {
                // Quotient, with degenerate-vertex dust (relative mass below
                // 1e-10) dropped: a simulation would effectively never take
                // those actions, and keeping them leaks rollouts into states
                // the measure does not actually visit.
                const double p = std::max(occupation.at(z, a), 0.0) / mass;
                if (p > 1e-10) {
                    policy.action_probs(z, a) = p;
                    kept += p;
                }
            }
            policy.action_probs.row(z) /= kept;
        } else {
            policy.action_probs(z, fallback_action) = 1.0;
        }
    }
    return policy;
}

Eigen::VectorXd stationary_distribution(const Policy& policy, const Kernel& kernel) {
    policy.validate();
    const long n = kernel.n_states;
    if (policy.n_states() != n || policy.n_actions() != kernel.n_actions) {
        throw std::invalid_argument("stationary_distribution: policy and kernel sizes disagree");
    }

    // Columns of (P^T - I) indexed by the source state; row 0 replaced by the
    // normalization, the same construction markov-core uses, sparse here.
    std::vector<Eigen::Triplet<double>> triplets;
    for (long z = 0; z < n; ++z) {
        if (z != 0) triplets.emplace_back(static_cast<int>(z), static_cast<int>(z), -1.0);
        triplets.emplace_back(0, static_cast<int>(z), 1.0);
        for (int a = 0; a < kernel.n_actions; ++a) {
            const double mu = policy.action_probs(z, a);
            if (mu == 0.0) continue;
            for (const Kernel::Entry& entry : kernel.row(z, a)) {
                if (entry.next == 0) continue;  // replaced row
                triplets.emplace_back(static_cast<int>(entry.next), static_cast<int>(z),
                                      mu * entry.prob);
            }
        }
    }
    Eigen::SparseMatrix<double> system(n, n);
    system.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(0) = 1.0;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(system);
    if (lu.info() != Eigen::Success) {
        throw std::runtime_error(
            "stationary_distribution: induced chain solve failed (no unique recurrent class?)");
    }
    Eigen::VectorXd pi = lu.solve(rhs);
    pi /= pi.sum();

    // Residual check against the induced transition operator.
    Eigen::VectorXd next = Eigen::VectorXd::Zero(n);
    for (long z = 0; z < n; ++z) {
        if (pi(z) == 0.0) continue;
        for (int a = 0; a < kernel.n_actions; ++a) {
            const double mass = pi(z) * policy.action_probs(z, a);
            if (mass == 0.0) continue;
            for (const Kernel::Entry& entry : kernel.row(z, a)) {
                next(entry.next) += mass * entry.prob;
            }
        }
    }
    const double residual = (next - pi).cwiseAbs().maxCoeff();
    if (!(residual <= 1e-9) || pi.minCoeff() < -1e-9) {
        throw std::runtime_error("stationary_distribution: solve did not converge (residual " +
                                 std::to_string(residual) + ")");
    }
    return pi;
}

PolicyAverages evaluate_policy(const Policy& policy, const Kernel& kernel, const CostSpec& costs,
                               long initial_state) {
    policy.validate();
    const long n = kernel.n_states;
    if (policy.n_states() != n || policy.n_actions() != kernel.n_actions) {
        throw std::invalid_argument("evaluate_policy: policy and kernel sizes disagree");
    }
    if (initial_state < 0 || initial_state >= n) {
        throw std::invalid_argument("evaluate_policy: initial state out of range");
    }

    // Restrict to the states reachable from the initial state; the set is
    // closed under the policy, so the subchain is stochastic.
    std::vector<long> reachable;
    std::vector<long> local_index(static_cast<std::size_t>(n), -1);
    reachable.push_back(initial_state);
    local_index[static_cast<std::size_t>(initial_state)] = 0;
    for (std::size_t head = 0; head < reachable.size(); ++head) {
        const long z = reachable[head];
        for (int a = 0; a < kernel.n_actions; ++a) {
            if (policy.action_probs(z, a) <= 0.0) continue;
            for (const Kernel::Entry& entry : kernel.row(z, a)) {
                if (entry.prob <= 0.0) continue;
                if (local_index[static_cast<std::size_t>(entry.next)] < 0) {
                    local_index[static_cast<std::size_t>(entry.next)] =
                        static_cast<long>(reachable.size());
                    reachable.push_back(entry.next);
                }
            }
        }
    }
    const long nr = static_cast<long>(reachable.size());

    // Replaced-row stationary solve on the reachable subchain, the same
    // construction markov-core uses, sparse here.
    std::vector<Eigen::Triplet<double>> triplets;
    for (long zi = 0; zi < nr; ++zi) {
        const long z = reachable[static_cast<std::size_t>(zi)];
        if (zi != 0) triplets.emplace_back(static_cast<int>(zi), static_cast<int>(zi), -1.0);
        triplets.emplace_back(0, static_cast<int>(zi), 1.0);
        for (int a = 0; a < kernel.n_actions; ++a) {
            const double mu = policy.action_probs(z, a);
            if (mu <= 0.0) continue;
            for (const Kernel::Entry& entry : kernel.row(z, a)) {
                const long ni = local_index[static_cast<std::size_t>(entry.next)];
                if (ni == 0) continue;  // replaced row
                triplets.emplace_back(static_cast<int>(ni), static_cast<int>(zi),
                                      mu * entry.prob);
            }
        }
    }
    Eigen::SparseMatrix<double> system(nr, nr);
    system.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nr);
    rhs(0) = 1.0;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(system);
    if (lu.info() != Eigen::Success) {
        throw std::runtime_error(
            "evaluate_policy: stationary solve failed (no unique recurrent class reachable)");
    }
    Eigen::VectorXd pi = lu.solve(rhs);
    pi /= pi.sum();

    Eigen::VectorXd next = Eigen::VectorXd::Zero(nr);
    PolicyAverages averages;
    for (long zi = 0; zi < nr; ++zi) {
        const long z = reachable[static_cast<std::size_t>(zi)];
        for (int a = 0; a < kernel.n_actions; ++a) {
            const double mass = pi(zi) * policy.action_probs(z, a);
            if (mass == 0.0) continue;
            for (const Kernel::Entry& entry : kernel.row(z, a)) {
                next(local_index[static_cast<std::size_t>(entry.next)]) += mass * entry.prob;
            }
            const long col = z * kernel.n_actions + a;
            averages.objective += mass * costs.objective(col);
            for (int k = 0; k < 4; ++k) {
                averages.constraint[static_cast<std::size_t>(k)] +=
                    mass * costs.constraint[static_cast<std::size_t>(k)](col);
            }
        }
    }
    const double residual = (next - pi).cwiseAbs().maxCoeff();
    if (!(residual <= 1e-9) || pi.minCoeff() < -1e-9) {
        throw std::runtime_error("evaluate_policy: stationary solve did not converge (residual " +
                                 std::to_string(residual) + ")");
    }
    return averages;
}

namespace {

/// Short kernel rollout; reports whether it ends inside the support of the
/// occupation measure. Fixed internal seed: this is a structural check, not
/// a statistical one.
bool warmup_reaches_support(const Kernel& kernel, const Policy& policy, const Eigen::VectorXd& pi,
                            long start) {
    SplitMix64 rng(0x5eed0001u);
    long z = start;
    const long steps = 20000;
    for (long t = 0; t < steps; ++t) {
        double u = rng.next_double();
        int a = 0;
        for (; a < kernel.n_actions - 1; ++a) {
            u -= policy.action_probs(z, a);
            if (u < 0.0) break;
        }
        u = rng.next_double();
        const auto& row = kernel.row(z, a);
        long next = row.back().next;
        for (const Kernel::Entry& entry : row) {
            u -= entry.prob;
            if (u < 0.0) {
                next = entry.next;
                break;
            }
        }
        z = next;
    }
    return pi(z) > 1e-12;
}

}  // namespace

CmdpResult solve_cmdp(const Kernel& kernel, const CostSpec& costs, const AgingBounds& bounds,
                      const SimplexOptions& options) {
    SimplexOptions lp_options = options;
    if (lp_options.crash_columns.empty()) {
        // Seed the basis with one column per state (the last action, which
        // keeps the plant mixing); the solver validates the hint.
        lp_options.crash_columns.reserve(static_cast<std::size_t>(kernel.n_states));
        for (long z = 0; z < kernel.n_states; ++z) {
            lp_options.crash_columns.push_back(z * kernel.n_actions + (kernel.n_actions - 1));
        }
    }
    const LpProblem problem = build_lp(kernel, costs, bounds);
    const LpSolution lp_solution = solve(problem, lp_options);

    CmdpResult result;
    result.diagnostics.bounds = bounds.c_hat;
    result.diagnostics.lp_iterations = lp_solution.iterations;

    if (lp_solution.status == LpStatus::kUnbounded) {
        result.status = CmdpStatus::kUnbounded;
        result.diagnostics.message = "occupation-measure LP reported unbounded";
        return result;
    }
    if (lp_solution.status == LpStatus::kInfeasible) {
        result.status = CmdpStatus::kInfeasible;
        // Name the unattainable bounds: minimize each constrained cost on the
        // unconstrained polytope and compare against its bound.
        std::string report = "bounds are jointly unattainable";
        for (int k = 0; k < 4; ++k) {
            if (!bounds.is_finite(k)) continue;
            CostSpec probe = costs;
            probe.objective = costs.constraint[static_cast<std::size_t>(k)];
            const LpProblem min_problem = build_lp(kernel, probe, AgingBounds::unconstrained());
            const LpSolution min_solution = solve(min_problem, lp_options);
            if (min_solution.status != LpStatus::kOptimal) continue;
            result.diagnostics.min_achievable[static_cast<std::size_t>(k)] = min_solution.objective;
            if (min_solution.objective > bounds.c_hat[static_cast<std::size_t>(k)] + 1e-9) {
                report += "; bound " + std::to_string(k + 1) + " (" +
                          std::to_string(bounds.c_hat[static_cast<std::size_t>(k)]) +
                          ") below the minimum achievable " + std::to_string(min_solution.objective);
            }
        }
        result.diagnostics.message = report;
        return result;
    }

    result.status = CmdpStatus::kOptimal;
    result.occupation.x = lp_solution.x;
    result.occupation.n_states = kernel.n_states;
    result.occupation.n_actions = kernel.n_actions;
    result.policy = extract_policy(result.occupation);

    result.diagnostics.objective = lp_solution.objective;
    for (int k = 0; k < 4; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        result.diagnostics.achieved[ks] = costs.constraint[ks].dot(lp_solution.x);
        result.diagnostics.binding[ks] =
            bounds.is_finite(k) &&
            std::abs(result.diagnostics.achieved[ks] - bounds.c_hat[ks]) <= 1e-6;
    }
    result.diagnostics.randomized_states = result.policy.n_randomized_states();

    // The state marginal of the occupation measure is the stationary
    // distribution of the induced chain on its own support; its mode is the
    // natural start for rollouts.
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(kernel.n_states);
    long mode = 0;
    for (long z = 0; z < kernel.n_states; ++z) {
        for (int a = 0; a < kernel.n_actions; ++a) pi(z) += result.occupation.at(z, a);
        if (pi(z) > pi(mode)) mode = z;
    }
    result.diagnostics.initial_state = mode;
    result.diagnostics.recurrent_class_reached =
        warmup_reaches_support(kernel, result.policy, pi, mode);
    return result;
}

void write_policy(const Policy& policy, std::ostream& out, const std::string& config_hash,
                  long initial_state) {
    policy.validate();
    out << "# ehs-policy v1\n";
    out << "# config_hash=" << config_hash << "\n";
    out << "# state_order=mixed-radix, lambda fastest, then l, y, w, q, h slowest\n";
    out << "# initial_state=" << initial_state << "\n";
    out << policy.n_states() << " " << policy.n_actions() << "\n";
    char line[80];
    for (int z = 0; z < policy.n_states(); ++z) {
        for (int a = 0; a < policy.n_actions(); ++a) {
            const double p = policy.action_probs(z, a);
            if (p <= 0.0) continue;
            std::snprintf(line, sizeof(line), "%d %d %.17g\n", z, a, p);
            out << line;
        }
    }
}

Policy read_policy(std::istream& in, std::string* config_hash, long* initial_state) {
    std::string line;
    long n_states = -1;
    int n_actions = -1;
    Policy policy;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string hash_tag = "# config_hash=";
            if (config_hash != nullptr && line.rfind(hash_tag, 0) == 0) {
                *config_hash = line.substr(hash_tag.size());
            }
            const std::string init_tag = "# initial_state=";
            if (initial_state != nullptr && line.rfind(init_tag, 0) == 0) {
                *initial_state = std::stol(line.substr(init_tag.size()));
            }
            continue;
        }
        std::istringstream fields(line);
        if (n_states < 0) {
            if (!(fields >> n_states >> n_actions) || n_states < 1 || n_actions < 1) {
                throw std::invalid_argument("read_policy: malformed dimension line: " + line);
            }
            policy.action_probs = Eigen::MatrixXd::Zero(n_states, n_actions);
            continue;
        }
        long z = 0;
        int a = 0;
        double p = 0.0;
        if (!(fields >> z >> a >> p) || z < 0 || z >= n_states || a < 0 || a >= n_actions) {
            throw std::invalid_argument("read_policy: malformed row: " + line);
        }
        policy.action_probs(z, a) = p;
    }
    if (n_states < 0) throw std::invalid_argument("read_policy: missing dimension line");
    policy.validate();
    return policy;
}

}  // namespace ehs
