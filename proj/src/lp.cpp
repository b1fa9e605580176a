#include "ehs/lp.hpp"

#include "ehs/rng.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ehs {

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::kOptimal: return "optimal";
        case LpStatus::kInfeasible: return "infeasible";
        case LpStatus::kUnbounded: return "unbounded";
    }
    return "unknown";
}

void LpProblem::validate() const {
    const long n = n_vars();
    if (n < 1) throw std::invalid_argument("LpProblem: no variables");
    if (eq_matrix.rows() != eq_rhs.size() || (eq_rhs.size() > 0 && eq_matrix.cols() != n)) {
        throw std::invalid_argument("LpProblem: equality block dimensions inconsistent");
    }
    if (ineq_matrix.rows() != ineq_rhs.size() || (ineq_rhs.size() > 0 && ineq_matrix.cols() != n)) {
        throw std::invalid_argument("LpProblem: inequality block dimensions inconsistent");
    }
    if (!objective.allFinite() || !eq_rhs.allFinite() || !ineq_rhs.allFinite()) {
        throw std::invalid_argument("LpProblem: non-finite objective or right-hand side");
    }
}

namespace {

struct SparseCol {
    std::vector<std::pair<int, double>> entries;  // (row, value)
};

/// Internal: the working basis lost rank to accumulated update error; the
/// driver restarts the solve once with tighter numerics.
struct SingularBasisError : std::runtime_error {
    SingularBasisError() : std::runtime_error("lp: basis factorization failed") {}
};

/// Basis representation B = B0 * E1 * ... * Ek: a sparse LU of the basis at
/// the last refactorization plus a product-form eta file.
class BasisEngine {
public:
    /// Returns false when the basis is singular to working precision.
    bool refactor(const std::vector<SparseCol>& cols, const std::vector<int>& basis) {
        const int m = static_cast<int>(basis.size());
        std::vector<Eigen::Triplet<double>> triplets;
        for (int j = 0; j < m; ++j) {
            for (const auto& [row, value] : cols[static_cast<std::size_t>(basis[j])].entries) {
                triplets.emplace_back(row, j, value);
            }
        }
        Eigen::SparseMatrix<double> basis_matrix(m, m);
        basis_matrix.setFromTriplets(triplets.begin(), triplets.end());
        lu_.compute(basis_matrix);
        if (lu_.info() != Eigen::Success) return false;
        etas_.clear();
        return true;
    }

    void ftran(Eigen::VectorXd& v) const {
        v = lu_.solve(v);
        for (const auto& [r, d] : etas_) {
            const double t = v(r) / d(r);
            if (t != 0.0) {
                v.noalias() -= d * t;
            }
            v(r) = t;
        }
    }

    void btran(Eigen::VectorXd& v) const {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            const auto& [r, d] = *it;
            const double vr = v(r);
            const double s = d.dot(v);
            v(r) = (vr - (s - d(r) * vr)) / d(r);
        }
        v = lu_.transpose().solve(v);
    }

    void push_eta(int r, Eigen::VectorXd d) { etas_.emplace_back(r, std::move(d)); }
    long eta_count() const { return static_cast<long>(etas_.size()); }

private:
    // mutable: SparseLU::transpose() is a non-const accessor in Eigen 3.4.
    mutable Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    std::vector<std::pair<int, Eigen::VectorXd>> etas_;
};

class Simplex {
public:
    Simplex(const LpProblem& problem, const SimplexOptions& options)
        : problem_(problem), opt_(options) {
        build_working_form();
    }

    LpSolution run() {
        // Phase 1: minimize the artificial sum down to (numerical) zero.
        phase_ = 1;
        set_phase_costs();
        const LoopOutcome outcome1 = iterate();
        if (outcome1 == LoopOutcome::kUnbounded) {
            throw std::runtime_error("lp: phase-1 objective unbounded; numerical breakdown");
        }
        if (phase_objective() > opt_.feas_tol * rhs_scale_) {
            LpSolution solution;
            solution.status = LpStatus::kInfeasible;
            solution.iterations = iterations_;
            return solution;
        }
        drive_out_artificials();

        phase_ = 2;
        set_phase_costs();
        stall_count_ = 0;
        bland_mode_ = false;
        best_objective_ = std::numeric_limits<double>::infinity();
        const LoopOutcome outcome2 = iterate();
        if (outcome2 == LoopOutcome::kUnbounded) {
            LpSolution solution;
            solution.status = LpStatus::kUnbounded;
            solution.iterations = iterations_;
            return solution;
        }
        return finish();
    }

private:
    enum class LoopOutcome { kOptimal, kUnbounded };

    void build_working_form() {
        n_struct_ = problem_.n_vars();
        const long n_eq = problem_.n_eq();
        const long n_ineq = problem_.n_ineq();
        m_ = n_eq + n_ineq;
        if (m_ == 0) {
            throw std::invalid_argument("lp: problem has no constraints");
        }

        rhs_.resize(m_);
        rhs_.head(n_eq) = problem_.eq_rhs;
        rhs_.tail(n_ineq) = problem_.ineq_rhs;
        row_sign_.assign(static_cast<std::size_t>(m_), 1.0);
        for (long i = 0; i < m_; ++i) {
            if (rhs_(i) < 0.0) {
                row_sign_[static_cast<std::size_t>(i)] = -1.0;
                rhs_(i) = -rhs_(i);
            }
        }
        rhs_scale_ = std::max(1.0, rhs_.maxCoeff());

        cols_.resize(static_cast<std::size_t>(n_struct_ + n_ineq));
        for (long j = 0; j < n_struct_; ++j) {
            auto& col = cols_[static_cast<std::size_t>(j)].entries;
            for (Eigen::SparseMatrix<double>::InnerIterator it(problem_.eq_matrix, j); it; ++it) {
                col.emplace_back(static_cast<int>(it.row()),
                                 it.value() * row_sign_[static_cast<std::size_t>(it.row())]);
            }
            if (n_ineq > 0) {
                for (Eigen::SparseMatrix<double>::InnerIterator it(problem_.ineq_matrix, j); it; ++it) {
                    const long row = n_eq + it.row();
                    col.emplace_back(static_cast<int>(row),
                                     it.value() * row_sign_[static_cast<std::size_t>(row)]);
                }
            }
        }
        slack_base_ = n_struct_;
        for (long j = 0; j < n_ineq; ++j) {
            const long row = n_eq + j;
            cols_[static_cast<std::size_t>(slack_base_ + j)].entries.emplace_back(
                static_cast<int>(row), row_sign_[static_cast<std::size_t>(row)]);
        }
        art_base_ = n_struct_ + n_ineq;

        if (!opt_.crash_columns.empty() && init_crash_basis()) {
            // crash start accepted
        } else {
            init_textbook_basis();
        }

        n_total_ = static_cast<long>(cols_.size());
        basic_pos_.assign(static_cast<std::size_t>(n_total_), -1);
        for (long i = 0; i < m_; ++i) {
            basic_pos_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] =
                static_cast<int>(i);
        }
        banned_.assign(static_cast<std::size_t>(n_total_), 0);
        n_basic_artificials_ = 0;
        for (long i = 0; i < m_; ++i) {
            if (is_artificial(basis_[static_cast<std::size_t>(i)])) ++n_basic_artificials_;
        }

        if (!engine_.refactor(cols_, basis_)) throw SingularBasisError();
        x_basic_ = rhs_;
        engine_.ftran(x_basic_);

        max_iterations_ = opt_.max_iterations > 0
                              ? opt_.max_iterations
                              : 20000 + 25 * m_ + 5 * (n_struct_ + n_ineq + m_);
        stall_limit_ = opt_.stall_limit > 0 ? opt_.stall_limit : std::max<long>(200, m_ / 2);
    }

    /// Textbook initial basis: positive slacks where available, +1 artificial
    /// columns elsewhere.
    void init_textbook_basis() {
        cols_.resize(static_cast<std::size_t>(art_base_));
        const long n_eq = problem_.n_eq();
        basis_.assign(static_cast<std::size_t>(m_), -1);
        for (long i = 0; i < m_; ++i) {
            const bool slack_ok = i >= n_eq && row_sign_[static_cast<std::size_t>(i)] > 0.0;
            if (slack_ok) {
                basis_[static_cast<std::size_t>(i)] = static_cast<int>(slack_base_ + (i - n_eq));
            } else {
                const int art_col = static_cast<int>(cols_.size());
                cols_.push_back(SparseCol{{{static_cast<int>(i), 1.0}}});
                basis_[static_cast<std::size_t>(i)] = art_col;
            }
        }
    }

    /// Crash start from the caller's column hint: hint columns fill equality
    /// slots, slacks cover the inequality rows, and artificials pad whatever
    /// remains (the redundant balance row of an occupation LP, in practice).
    /// Slack slots that come out negative are re-covered by -1 artificials,
    /// so phase 1 starts from the hint's small infeasibility instead of from
    /// the all-artificial origin. Returns false when the hint is unusable.
    bool init_crash_basis() {
        const long n_eq = problem_.n_eq();
        const long n_ineq = problem_.n_ineq();

        std::vector<int> hints;
        std::vector<char> seen(static_cast<std::size_t>(n_struct_), 0);
        for (long col : opt_.crash_columns) {
            if (col < 0 || col >= n_struct_ || seen[static_cast<std::size_t>(col)]) continue;
            seen[static_cast<std::size_t>(col)] = 1;
            hints.push_back(static_cast<int>(col));
            if (static_cast<long>(hints.size()) == m_ - n_ineq) break;
        }
        const long padding = m_ - n_ineq - static_cast<long>(hints.size());
        if (padding < 0) return false;

        basis_.assign(static_cast<std::size_t>(m_), -1);
        std::vector<int> slots;
        for (int col : hints) slots.push_back(col);
        for (long j = 0; j < n_ineq; ++j) slots.push_back(static_cast<int>(slack_base_ + j));
        if (padding > 0 && n_eq == 0) return false;
        cols_.resize(static_cast<std::size_t>(art_base_));
        for (long k = 0; k < padding; ++k) {
            // Pad on the first equality rows; for balance blocks row 0 is as
            // redundant as any other.
            const int art_col = static_cast<int>(cols_.size());
            cols_.push_back(SparseCol{{{static_cast<int>(std::min(k, n_eq - 1)), 1.0}}});
            slots.push_back(art_col);
        }
        for (long i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = slots[static_cast<std::size_t>(i)];

        if (!engine_.refactor(cols_, basis_)) return false;
        Eigen::VectorXd x = rhs_;
        engine_.ftran(x);

        bool patched = false;
        for (long i = 0; i < m_; ++i) {
            if (x(i) >= -opt_.feas_tol) continue;
            const int col = basis_[static_cast<std::size_t>(i)];
            const int row = basic_row_of_column(col);
            if (col >= slack_base_ && row >= 0) {
                // Negative slack or padding artificial: cover its row with a
                // -1 artificial instead, which enters at a positive level.
                const int art_col = static_cast<int>(cols_.size());
                cols_.push_back(SparseCol{{{row, -1.0}}});
                basis_[static_cast<std::size_t>(i)] = art_col;
                patched = true;
            } else {
                return false;  // the hint itself is infeasible beyond tolerance
            }
        }
        if (patched && !engine_.refactor(cols_, basis_)) return false;
        return true;
    }

    /// Row covered by a unit-ish column (slack or artificial); -1 otherwise.
    int basic_row_of_column(int col) const {
        const auto& entries = cols_[static_cast<std::size_t>(col)].entries;
        return entries.size() == 1 ? entries.front().first : -1;
    }

    bool is_artificial(int col) const { return col >= art_base_; }

    void set_phase_costs() {
        cost_.assign(static_cast<std::size_t>(n_total_), 0.0);
        if (phase_ == 1) {
            for (long c = art_base_; c < n_total_; ++c) cost_[static_cast<std::size_t>(c)] = 1.0;
        } else {
            for (long c = 0; c < n_struct_; ++c) cost_[static_cast<std::size_t>(c)] = problem_.objective(c);
        }
    }

    double phase_objective() const {
        double obj = 0.0;
        for (long i = 0; i < m_; ++i) {
            obj += cost_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] * x_basic_(i);
        }
        return obj;
    }

    double reduced_cost(int col, const Eigen::VectorXd& y) const {
        double rc = cost_[static_cast<std::size_t>(col)];
        for (const auto& [row, value] : cols_[static_cast<std::size_t>(col)].entries) {
            rc -= y(row) * value;
        }
        return rc;
    }

    Eigen::VectorXd dual_vector() const {
        Eigen::VectorXd y(m_);
        for (long i = 0; i < m_; ++i) y(i) = cost_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])];
        engine_.btran(y);
        return y;
    }

    /// Entering-variable choice: Dantzig (most negative reduced cost, lowest
    /// index on ties) until the objective stalls, then Bland's first-eligible
    /// rule, which guarantees termination on degenerate instances.
    int price(const Eigen::VectorXd& y) const {
        int best_col = -1;
        double best_rc = -opt_.opt_tol;
        for (long col = 0; col < n_total_; ++col) {
            const auto c = static_cast<std::size_t>(col);
            if (basic_pos_[c] >= 0 || banned_[c]) continue;
            if (is_artificial(static_cast<int>(col))) continue;  // never re-enters
            const double rc = reduced_cost(static_cast<int>(col), y);
            if (bland_mode_) {
                if (rc < -opt_.opt_tol) return static_cast<int>(col);
            } else if (rc < best_rc) {
                best_rc = rc;
                best_col = static_cast<int>(col);
            }
        }
        return best_col;
    }

    Eigen::VectorXd ftran_column(int col) const {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(m_);
        for (const auto& [row, value] : cols_[static_cast<std::size_t>(col)].entries) d(row) = value;
        engine_.ftran(d);
        return d;
    }

    /// Ratio test. In phase 2, basic artificials pinned at zero leave with
    /// absolute priority whenever the entering column moves them at all, so
    /// they stay at zero level for good. Among near-tied ratios the largest
    /// pivot wins; under Bland's rule the lowest basic column index wins.
    int choose_leaving(const Eigen::VectorXd& d) const {
        if (phase_ == 2) {
            int art_row = -1;
            double art_pivot = opt_.pivot_tol;
            int art_col_id = std::numeric_limits<int>::max();
            for (long i = 0; i < m_; ++i) {
                const int col_i = basis_[static_cast<std::size_t>(i)];
                if (!is_artificial(col_i) || std::abs(d(i)) <= opt_.pivot_tol) continue;
                if (bland_mode_ ? col_i < art_col_id : std::abs(d(i)) > art_pivot) {
                    art_pivot = std::abs(d(i));
                    art_col_id = col_i;
                    art_row = static_cast<int>(i);
                }
            }
            if (art_row >= 0) return art_row;
        }

        double min_ratio = std::numeric_limits<double>::infinity();
        for (long i = 0; i < m_; ++i) {
            if (d(i) > opt_.pivot_tol) {
                min_ratio = std::min(min_ratio, std::max(x_basic_(i), 0.0) / d(i));
            }
        }
        if (!std::isfinite(min_ratio)) return -1;

        // Exact-minimum ratio test; the tolerance below only groups honest
        // floating-point ties. Anything looser injects infeasibility into
        // the rows that lost the ratio race.
        const double slack = 1e-12 * (1.0 + min_ratio);
        int leave = -1;
        double best_pivot = 0.0;
        int best_col_id = std::numeric_limits<int>::max();
        for (long i = 0; i < m_; ++i) {
            const double di = d(i);
            if (di <= opt_.pivot_tol) continue;
            const double ratio = std::max(x_basic_(i), 0.0) / di;
            if (ratio > min_ratio + slack) continue;
            const int col_i = basis_[static_cast<std::size_t>(i)];
            if (bland_mode_) {
                if (col_i < best_col_id) {
                    best_col_id = col_i;
                    leave = static_cast<int>(i);
                }
            } else if (di > best_pivot) {
                best_pivot = di;
                leave = static_cast<int>(i);
            }
        }
        return leave;
    }

    void pivot(int entering, int leave_row, Eigen::VectorXd d) {
        const double dr = d(leave_row);
        const double theta = std::max(std::max(x_basic_(leave_row), 0.0) / dr, 0.0);
        x_basic_.noalias() -= d * theta;
        x_basic_(leave_row) = theta;

        const int leaving = basis_[static_cast<std::size_t>(leave_row)];
        basic_pos_[static_cast<std::size_t>(leaving)] = -1;
        basis_[static_cast<std::size_t>(leave_row)] = entering;
        basic_pos_[static_cast<std::size_t>(entering)] = leave_row;
        if (is_artificial(leaving)) --n_basic_artificials_;

        engine_.push_eta(leave_row, std::move(d));
        if (engine_.eta_count() >= opt_.refactor_every) {
            refresh_factorization();
        }
        ++iterations_;
    }

    void refresh_factorization() {
        if (!engine_.refactor(cols_, basis_)) throw SingularBasisError();
        x_basic_ = rhs_;
        engine_.ftran(x_basic_);
        perturbed_ = false;
        // A fresh solve exposes any infeasibility the update drift let in;
        // treat a clear breakdown like a singular basis and restart.
        if (phase_ == 2 && x_basic_.minCoeff() < -1e-5 * rhs_scale_) {
            throw SingularBasisError();
        }
        // Bans reflect the old factorization's numerics only.
        std::fill(banned_.begin(), banned_.end(), 0);
    }

    /// Degeneracy relief: give the zero-level basic variables small fake
    /// positive values so the ratio test makes strictly positive steps off
    /// the plateau. Reduced costs never look at basic values, so pricing and
    /// the optimality test stay exact; the next refactorization restores the
    /// true solution. Values are seeded from the iteration count, keeping the
    /// whole run deterministic.
    void apply_degeneracy_perturbation() {
        SplitMix64 jitter(0x7e57ab1e5eedULL ^ static_cast<std::uint64_t>(iterations_));
        for (long i = 0; i < m_; ++i) {
            if (is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
            if (x_basic_(i) < 1e-9 * rhs_scale_) {
                x_basic_(i) = 1e-8 * rhs_scale_ * (1.0 + jitter.next_double());
            }
        }
        perturbed_ = true;
        ++perturb_rounds_;
        stall_count_ = 0;
    }

    LoopOutcome iterate() {
        long last_artificial_count = n_basic_artificials_;
        while (true) {
            if (iterations_ > max_iterations_) {
                throw std::runtime_error("lp: iteration limit exceeded (" +
                                         std::to_string(max_iterations_) + ")");
            }
            if (phase_ == 1 && !perturbed_ && phase_objective() <= 1e-12 * rhs_scale_) {
                return LoopOutcome::kOptimal;
            }

            const Eigen::VectorXd y = dual_vector();
            const int entering = price(y);
            if (entering < 0) {
                if (perturbed_) {
                    // Optimality was proven with fake basic values in place;
                    // restore the true ones before reporting.
                    refresh_factorization();
                }
                return LoopOutcome::kOptimal;
            }

            Eigen::VectorXd d = ftran_column(entering);
            const double d_max = d.cwiseAbs().maxCoeff();
            if (d_max <= opt_.pivot_tol) {
                if (cols_[static_cast<std::size_t>(entering)].entries.empty()) {
                    // A variable absent from every constraint with negative
                    // cost is a free ray.
                    if (phase_ == 2) return LoopOutcome::kUnbounded;
                }
                // Numerically empty column; exclude it and re-price.
                banned_[static_cast<std::size_t>(entering)] = 1;
                continue;
            }
            const int leave_row = choose_leaving(d);
            if (leave_row < 0) return LoopOutcome::kUnbounded;
            if (std::abs(d(leave_row)) <= std::max(opt_.pivot_tol, 1e-7 * d_max)) {
                // A relatively tiny pivot gives the product-form update an
                // amplification of d_max/|d_r|; skip the column until the
                // next refactorization cleans the numerics.
                banned_[static_cast<std::size_t>(entering)] = 1;
                continue;
            }
            pivot(entering, leave_row, std::move(d));

            // Stall handling, in escalation order: perturb the degenerate
            // plateau a few times, then fall back to Bland's rule, whose
            // episodes terminate and sit at strictly decreasing objective
            // values, so the combination cannot cycle. Driving an artificial
            // out of the basis counts as progress even when the objective is
            // flat, which keeps the degenerate stretch of phase 1 on fast
            // pricing. Objective bookkeeping pauses while fake basic values
            // are in place.
            const double obj = phase_objective();
            if (opt_.log_every > 0 && iterations_ % opt_.log_every == 0) {
                std::fprintf(stderr,
                             "lp: phase %d iter %ld obj %.9g bland %d perturbed %d artificials %ld\n",
                             phase_, iterations_, obj, bland_mode_ ? 1 : 0, perturbed_ ? 1 : 0,
                             n_basic_artificials_);
            }
            if (!perturbed_) {
                if (obj < best_objective_ - 1e-12 * (1.0 + std::abs(best_objective_))) {
                    best_objective_ = obj;
                    stall_count_ = 0;
                    bland_mode_ = false;
                    perturb_rounds_ = 0;
                } else if (n_basic_artificials_ < last_artificial_count) {
                    stall_count_ = 0;
                } else if (++stall_count_ >= stall_limit_) {
                    if (perturb_rounds_ < 4) {
                        apply_degeneracy_perturbation();
                    } else {
                        bland_mode_ = true;
                    }
                }
            }
            last_artificial_count = n_basic_artificials_;
        }
    }

    /// After phase 1, pivot remaining basic artificials out wherever some
    /// non-artificial column can take their place; rows that admit none are
    /// linearly dependent and keep their artificial pinned at zero.
    void drive_out_artificials() {
        for (long r = 0; r < m_; ++r) {
            if (!is_artificial(basis_[static_cast<std::size_t>(r)])) continue;
            Eigen::VectorXd rho = Eigen::VectorXd::Unit(m_, r);
            engine_.btran(rho);

            int best_col = -1;
            double best_alpha = opt_.pivot_tol;
            for (long col = 0; col < art_base_; ++col) {
                if (basic_pos_[static_cast<std::size_t>(col)] >= 0) continue;
                double alpha = 0.0;
                for (const auto& [row, value] : cols_[static_cast<std::size_t>(col)].entries) {
                    alpha += rho(row) * value;
                }
                if (std::abs(alpha) > best_alpha) {
                    best_alpha = std::abs(alpha);
                    best_col = static_cast<int>(col);
                }
            }
            if (best_col < 0) continue;  // redundant row

            Eigen::VectorXd d = ftran_column(best_col);
            if (std::abs(d(r)) <= opt_.pivot_tol) continue;
            pivot(best_col, static_cast<int>(r), std::move(d));
        }
    }

    LpSolution finish() {
        refresh_factorization();

        LpSolution solution;
        solution.status = LpStatus::kOptimal;
        solution.iterations = iterations_;
        solution.x = Eigen::VectorXd::Zero(n_struct_);
        for (long i = 0; i < m_; ++i) {
            const int col = basis_[static_cast<std::size_t>(i)];
            if (col < n_struct_) solution.x(col) = x_basic_(i);
        }
        solution.objective = problem_.objective.dot(solution.x);

        Eigen::VectorXd y = dual_vector();
        const long n_eq = problem_.n_eq();
        solution.eq_duals.resize(n_eq);
        for (long i = 0; i < n_eq; ++i) solution.eq_duals(i) = y(i) * row_sign_[static_cast<std::size_t>(i)];
        solution.ineq_duals.resize(problem_.n_ineq());
        for (long i = 0; i < problem_.n_ineq(); ++i) {
            solution.ineq_duals(i) = y(n_eq + i) * row_sign_[static_cast<std::size_t>(n_eq + i)];
        }

        solution.min_x = solution.x.size() > 0 ? solution.x.minCoeff() : 0.0;
        if (n_eq > 0) {
            solution.max_eq_residual =
                (problem_.eq_matrix * solution.x - problem_.eq_rhs).cwiseAbs().maxCoeff();
        }
        if (problem_.n_ineq() > 0) {
            solution.max_ineq_violation = std::max(
                0.0, (problem_.ineq_matrix * solution.x - problem_.ineq_rhs).maxCoeff());
        }
        if (solution.max_eq_residual > 1e-6 * rhs_scale_ || solution.min_x < -1e-6) {
            throw std::runtime_error("lp: solution failed the final feasibility check (residual " +
                                     std::to_string(solution.max_eq_residual) + ")");
        }
        return solution;
    }

    const LpProblem& problem_;
    SimplexOptions opt_;

    long n_struct_ = 0;
    long slack_base_ = 0;
    long art_base_ = 0;
    long n_total_ = 0;
    long m_ = 0;
    double rhs_scale_ = 1.0;

    std::vector<SparseCol> cols_;
    Eigen::VectorXd rhs_;
    std::vector<double> row_sign_;
    std::vector<double> cost_;
    std::vector<int> basis_;
    std::vector<int> basic_pos_;
    std::vector<char> banned_;
    Eigen::VectorXd x_basic_;
    BasisEngine engine_;

    int phase_ = 1;
    bool bland_mode_ = false;
    bool perturbed_ = false;
    int perturb_rounds_ = 0;
    long stall_count_ = 0;
    long stall_limit_ = 200;
    long n_basic_artificials_ = 0;
    double best_objective_ = std::numeric_limits<double>::infinity();
    long iterations_ = 0;
    long max_iterations_ = 0;
};

}  // namespace

LpSolution solve(const LpProblem& problem, const SimplexOptions& options) {
    problem.validate();
    try {
        Simplex simplex(problem, options);
        return simplex.run();
    } catch (const SingularBasisError&) {
        // Accumulated update error degraded the basis; one retry with a
        // shorter eta file and stricter pivots clears it in practice.
        SimplexOptions retry = options;
        retry.refactor_every = std::max<long>(10, options.refactor_every / 4);
        retry.pivot_tol = options.pivot_tol * 100.0;
        Simplex simplex(problem, retry);
        return simplex.run();
    }
}

void write_lp_format(const LpProblem& problem, std::ostream& out) {
    problem.validate();
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    using RowMajor = Eigen::SparseMatrix<double, Eigen::RowMajor>;
    auto write_row = [&](const RowMajor& matrix, long row, const char* rel, double rhs_value,
                         const char* name) {
        out << " " << name << row << ":";
        bool any = false;
        for (RowMajor::InnerIterator it(matrix, row); it; ++it) {
            const double v = it.value();
            out << (v < 0 ? " - " : (any ? " + " : " ")) << fmt(std::abs(v)) << " x" << it.col();
            any = true;
        }
        if (!any) out << " 0 x0";
        out << " " << rel << " " << fmt(rhs_value) << "\n";
    };

    out << "\\ occupation-measure export\nMinimize\n obj:";
    bool any = false;
    for (long j = 0; j < problem.n_vars(); ++j) {
        const double v = problem.objective(j);
        if (v == 0.0) continue;
        out << (v < 0 ? " - " : (any ? " + " : " ")) << fmt(std::abs(v)) << " x" << j;
        any = true;
    }
    if (!any) out << " 0 x0";
    out << "\nSubject To\n";

    // Row-major copies make per-row iteration cheap.
    const RowMajor eq_rows(problem.eq_matrix);
    const RowMajor ineq_rows(problem.ineq_matrix);
    for (long i = 0; i < problem.n_eq(); ++i) write_row(eq_rows, i, "=", problem.eq_rhs(i), "e");
    for (long i = 0; i < problem.n_ineq(); ++i) {
        write_row(ineq_rows, i, "<=", problem.ineq_rhs(i), "i");
    }

    out << "Bounds\n";
    for (long j = 0; j < problem.n_vars(); ++j) out << " 0 <= x" << j << "\n";
    out << "End\n";
}

}  // namespace ehs
