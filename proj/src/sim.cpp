#include "ehs/sim.hpp"

#include "ehs/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ehs {

namespace {

long resolve_warmup(const SimOptions& options) {
    if (options.horizon < 1) throw std::invalid_argument("simulate: horizon must be >= 1");
    long warmup = options.warmup;
    if (warmup < 0) warmup = std::max<long>(options.horizon / 100, 1000);
    return std::min(warmup, options.horizon / 2);
}

/// Accumulates one per-slot quantity and its batch means.
class WindowedMean {
public:
    WindowedMean(long window, int batches)
        : window_(window), batches_(std::max(1, batches)), batch_sums_(batches_, 0.0) {
        batch_width_ = std::max<long>(1, (window_ + batches_ - 1) / batches_);
    }

    void add(long t, double value) {
        sum_ += value;
        const long b = std::min<long>(t / batch_width_, batches_ - 1);
        batch_sums_[static_cast<std::size_t>(b)] += value;
    }

    AvgSe finish() const {
        AvgSe out;
        if (window_ == 0) return out;
        out.mean = sum_ / static_cast<double>(window_);
        // Batch-means standard error; batches absorb the trace autocorrelation.
        const long full = (window_ + batch_width_ - 1) / batch_width_;
        if (full >= 2) {
            double mean_of_batches = 0.0;
            std::vector<double> means;
            means.reserve(static_cast<std::size_t>(full));
            for (long b = 0; b < full; ++b) {
                const long lo = b * batch_width_;
                const long hi = std::min(window_, lo + batch_width_);
                means.push_back(batch_sums_[static_cast<std::size_t>(b)] / (hi - lo));
                mean_of_batches += means.back();
            }
            mean_of_batches /= static_cast<double>(full);
            double var = 0.0;
            for (double m : means) var += (m - mean_of_batches) * (m - mean_of_batches);
            var /= static_cast<double>(full - 1);
            out.se = std::sqrt(var / static_cast<double>(full));
        }
        return out;
    }

private:
    long window_;
    int batches_;
    long batch_width_;
    std::vector<double> batch_sums_;
    double sum_ = 0.0;
};

int sample_row(const Eigen::MatrixXd& probs, int row, SplitMix64& rng) {
    double u = rng.next_double();
    const int last = static_cast<int>(probs.cols()) - 1;
    for (int j = 0; j < last; ++j) {
        u -= probs(row, j);
        if (u < 0.0) return j;
    }
    return last;
}

}  // namespace

TraceStats simulate(const Policy& policy, const System& system, const BatteryConstants& constants,
                    const SimOptions& options, Trace* trace, Eigen::MatrixXd* action_counts) {
    system.validate();
    constants.validate();
    policy.validate();
    const StateSpace space = system.state_space();
    if (policy.n_states() != space.size() || policy.n_actions() != system.config.n_actions()) {
        throw std::invalid_argument("simulate: policy is dimensioned for a different system");
    }
    if (!space.contains(options.initial)) {
        throw std::invalid_argument("simulate: initial state out of range");
    }

    const long horizon = options.horizon;
    const long warmup = resolve_warmup(options);
    const long window = horizon - warmup;
    const SystemConfig& config = system.config;

    SplitMix64 rng(options.seed);
    SystemState z = options.initial;
    long z_index = space.index_of(z);

    WindowedMean m_charge(window, options.batches);
    WindowedMean m_cycle(window, options.batches);
    WindowedMean m_delta(window, options.batches);
    WindowedMean m_persist(window, options.batches);
    WindowedMean m_objective(window, options.batches);

    double q_sum = 0.0, q_sq = 0.0, w_sum = 0.0, w_sq = 0.0;
    long saturated = 0;
    double throughput = 0.0;

    if (trace != nullptr) {
        for (auto* v : {&trace->h, &trace->q, &trace->w, &trace->y_idx, &trace->l, &trace->lam,
                        &trace->action, &trace->e, &trace->u}) {
            v->clear();
            v->reserve(static_cast<std::size_t>(horizon));
        }
    }
    if (action_counts != nullptr) {
        *action_counts = Eigen::MatrixXd::Zero(space.size(), config.n_actions());
    }

    for (long t = 0; t < horizon; ++t) {
        const int a_idx = sample_row(policy.action_probs, static_cast<int>(z_index), rng);
        const int a = config.actions[static_cast<std::size_t>(a_idx)];
        const int e = sample_row(system.harvest_emission.probs, z.h, rng);
        const int u = sample_row(system.load_emission.probs, z.l, rng);

        const int q_next = soc_update(config, z.q, a, e);
        const int w_next = backlog_update(config, z.w, a, u);
        const int y_next = y_update(config, config.y_value(z.y_idx), z.w);
        const int lam_next = lambda_update(z.q, q_next, z.lam);
        const int h_next = sample_row(system.harvest_chain.transition, z.h, rng);
        const int l_next = sample_row(system.load_chain.transition, z.l, rng);

        if (trace != nullptr) {
            trace->h.push_back(z.h);
            trace->q.push_back(z.q);
            trace->w.push_back(z.w);
            trace->y_idx.push_back(z.y_idx);
            trace->l.push_back(z.l);
            trace->lam.push_back(z.lam);
            trace->action.push_back(a);
            trace->e.push_back(e);
            trace->u.push_back(u);
        }

        if (t >= warmup) {
            const long tw = t - warmup;
            q_sum += z.q;
            q_sq += static_cast<double>(z.q) * z.q;
            w_sum += z.w;
            w_sq += static_cast<double>(z.w) * z.w;
            if (z.w == config.w_max) ++saturated;
            throughput += std::abs(a) + e;

            m_charge.add(tw, z.q);
            m_cycle.add(tw, (std::abs(a) + e) / (2.0 * constants.q_nom));
            m_delta.add(tw, std::abs(q_next - z.q));
            m_persist.add(tw, (q_next != z.q && lam_next == z.lam) ? 1.0 : 0.0);
            m_objective.add(tw, options.objective(config.y_value(z.y_idx)));
            if (action_counts != nullptr) (*action_counts)(z_index, a_idx) += 1.0;
        }

        z = SystemState{h_next, q_next, w_next, y_next, l_next, lam_next};
        z_index = space.index_of(z);
    }

    TraceStats stats;
    stats.horizon = horizon;
    stats.warmup = warmup;
    stats.seed = options.seed;
    const double n = static_cast<double>(window);

    stats.q_mean = q_sum / n;
    stats.w_mean = w_sum / n;
    const double q_var = std::max(0.0, q_sq / n - stats.q_mean * stats.q_mean);
    const double w_var = std::max(0.0, w_sq / n - stats.w_mean * stats.w_mean);
    stats.q_std = std::sqrt(q_var);
    stats.w_std = std::sqrt(w_var);
    stats.saturation_frac = static_cast<double>(saturated) / n;

    stats.soc_avg = stats.q_mean / config.q_max;
    stats.soc_std = stats.q_std / config.q_max;
    const double soc_var = q_var / (static_cast<double>(config.q_max) * config.q_max);
    stats.soc_dev = 2.0 * std::sqrt(3.0 * soc_var);

    stats.avg_charge = m_charge.finish();
    stats.avg_cycle_cost = m_cycle.finish();
    stats.avg_abs_delta = m_delta.finish();
    stats.avg_persistence = m_persist.finish();
    stats.avg_objective = m_objective.finish();

    stats.metrics.q_mu = stats.q_mean;
    stats.metrics.q_sigma2 = q_var;
    stats.metrics.n_cyc = throughput / (2.0 * constants.q_nom);
    stats.metrics.delta_bar = stats.avg_abs_delta.mean;
    stats.metrics.v_bar = stats.avg_persistence.mean;

    stats.degradation =
        detail::degrade_from_moments(stats.soc_avg, soc_var, stats.metrics.n_cyc, n, constants);
    return stats;
}

void WalkParams::validate() const {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("WalkParams: p must lie in (0,1)");
    if (delta_max < 1) throw std::invalid_argument("WalkParams: delta_max must be >= 1");
    if (tau < 1) throw std::invalid_argument("WalkParams: tau must be >= 1");
    if (samples < 2) throw std::invalid_argument("WalkParams: need at least two samples");
}

WalkReport validate_walk(const WalkParams& params, std::uint64_t seed) {
    params.validate();
    SplitMix64 rng(seed);

    std::vector<double> displacement(static_cast<std::size_t>(params.samples));
    const bool unit_steps = params.delta_max == 1;
    for (long s = 0; s < params.samples; ++s) {
        int dir = rng.next_double() < 0.5 ? 1 : -1;
        long long pos = 0;
        for (long t = 0; t < params.tau; ++t) {
            if (t > 0 && rng.next_double() >= params.p) dir = -dir;
            const long long amp =
                unit_steps ? 1
                           : 1 + static_cast<long long>(
                                     rng.next_below(static_cast<std::uint64_t>(params.delta_max)));
            pos += dir * amp;
        }
        displacement[static_cast<std::size_t>(s)] = static_cast<double>(pos);
    }

    WalkReport report;
    report.samples = params.samples;
    report.tau = params.tau;
    report.predicted_var = params.predicted_variance();

    double mean = 0.0;
    for (double x : displacement) mean += x;
    mean /= static_cast<double>(params.samples);
    double var = 0.0;
    for (double x : displacement) var += (x - mean) * (x - mean);
    var /= static_cast<double>(params.samples - 1);
    report.empirical_mean = mean;
    report.empirical_var = var;

    // Kolmogorov-Smirnov distance to the Gaussian with the empirical moments.
    std::sort(displacement.begin(), displacement.end());
    const double sd = std::sqrt(var);
    double ks = 0.0;
    const double inv_n = 1.0 / static_cast<double>(params.samples);
    for (long i = 0; i < params.samples; ++i) {
        const double zscore = (displacement[static_cast<std::size_t>(i)] - mean) / sd;
        const double cdf = 0.5 * std::erfc(-zscore / std::sqrt(2.0));
        ks = std::max(ks, std::abs(cdf - i * inv_n));
        ks = std::max(ks, std::abs(cdf - (i + 1) * inv_n));
    }
    report.normality_stat = ks;
    return report;
}

}  // namespace ehs
