#include "ehs/aging.hpp"

#include <cmath>
#include <stdexcept>

namespace ehs {

void BatteryConstants::validate() const {
    if (!(t_life > 0.0)) throw std::invalid_argument("BatteryConstants: t_life must be positive");
    if (!(q_nom > 0.0)) throw std::invalid_argument("BatteryConstants: q_nom must be positive");
    if (!std::isfinite(a_coef) || !std::isfinite(b_coef) || !std::isfinite(c_coef) ||
        !std::isfinite(d_coef)) {
        throw std::invalid_argument("BatteryConstants: model constants must be finite");
    }
}

int AgingBounds::n_finite() const {
    int n = 0;
    for (double v : c_hat) n += std::isfinite(v) ? 1 : 0;
    return n;
}

void AgingBounds::validate() const {
    for (double v : c_hat) {
        if (std::isnan(v)) throw std::invalid_argument("AgingBounds: bound is NaN");
    }
    if (std::isfinite(c_hat[3]) && (c_hat[3] < 0.0 || c_hat[3] > 1.0)) {
        throw std::invalid_argument("AgingBounds: persistence bound must lie in [0,1]");
    }
}

double objective_cost(const SystemConfig& config, const SystemState& z, const CostOptions& options) {
    return options.objective(config.y_value(z.y_idx));
}

std::array<double, 4> constraint_costs(const System& system, const StateSpace& space,
                                       const Kernel& kernel, const BatteryConstants& constants,
                                       long state_index, int action_index,
                                       const CostOptions& options) {
    const SystemState z = space.state_of(state_index);
    const int a = system.config.actions[static_cast<std::size_t>(action_index)];

    const double d1 = static_cast<double>(z.q);

    const double mean_arrival = expected_emission(system.harvest_emission, z.h);
    const double scale = options.normalize_cycles ? 1.0 / (2.0 * constants.q_nom) : 1.0;
    const double d2 = (std::abs(a) + mean_arrival) * scale;

    double d3 = 0.0;
    double d4 = 0.0;
    for (const Kernel::Entry& entry : kernel.row(state_index, action_index)) {
        const SystemState nz = space.state_of(entry.next);
        d3 += entry.prob * std::abs(nz.q - z.q);
        if (nz.q != z.q && nz.lam == z.lam) d4 += entry.prob;
    }
    return {d1, d2, d3, d4};
}

CostSpec build_cost_spec(const System& system, const StateSpace& space, const Kernel& kernel,
                         const BatteryConstants& constants, const CostOptions& options) {
    constants.validate();
    const long n = space.size() * system.config.n_actions();
    CostSpec spec;
    spec.objective.resize(n);
    for (auto& d : spec.constraint) d.resize(n);

    for (long zi = 0; zi < space.size(); ++zi) {
        const SystemState z = space.state_of(zi);
        const double c = objective_cost(system.config, z, options);
        for (int ai = 0; ai < system.config.n_actions(); ++ai) {
            const long col = zi * system.config.n_actions() + ai;
            const int a = system.config.actions[static_cast<std::size_t>(ai)];
            spec.objective(col) = c + options.action_tie_break * std::abs(a);
            const auto d = constraint_costs(system, space, kernel, constants, zi, ai, options);
            for (int k = 0; k < 4; ++k) spec.constraint[static_cast<std::size_t>(k)](col) = d[static_cast<std::size_t>(k)];
        }
    }
    return spec;
}

namespace detail {

double degrade_from_moments(double soc_avg, double soc_var, double n_cyc, double horizon,
                            const BatteryConstants& constants) {
    const double soc_dev = 2.0 * std::sqrt(3.0 * soc_var);
    const double d_prime = constants.a_coef * n_cyc * std::exp((soc_dev - 1.0) * constants.b_coef) +
                           0.2 * horizon / constants.t_life;
    return d_prime * constants.c_coef * std::exp(constants.d_coef * (soc_avg - 0.5));
}

}  // namespace detail

DiscreteMetrics discrete_metrics(const std::vector<int>& q_trace, const std::vector<int>& a_trace,
                                 const std::vector<int>& e_trace, double q_nom) {
    const std::size_t T = q_trace.size();
    if (a_trace.size() != T || e_trace.size() != T) {
        throw std::invalid_argument("discrete_metrics: trace lengths differ");
    }
    if (T < 2) throw std::invalid_argument("discrete_metrics: need at least two slots");
    if (!(q_nom > 0.0)) throw std::invalid_argument("discrete_metrics: q_nom must be positive");

    DiscreteMetrics m;
    double q_sum = 0.0;
    double throughput = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
        q_sum += q_trace[i];
        throughput += std::abs(a_trace[i]) + std::abs(e_trace[i]);
    }
    m.q_mu = q_sum / static_cast<double>(T);
    m.n_cyc = throughput / (2.0 * q_nom);

    double sq = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
        const double dev = q_trace[i] - m.q_mu;
        sq += dev * dev;
    }
    m.q_sigma2 = sq / static_cast<double>(T);

    double abs_delta_sum = 0.0;
    double persistent = 0.0;
    int flag = -1;  // unknown until the first nonzero step
    for (std::size_t i = 1; i < T; ++i) {
        const int delta = q_trace[i] - q_trace[i - 1];
        abs_delta_sum += std::abs(delta);
        if (i >= 2 && delta != 0 && flag != -1) {
            const int dir = delta > 0 ? 1 : 0;
            if (dir == flag) persistent += 1.0;
        }
        if (delta != 0) flag = delta > 0 ? 1 : 0;
    }
    m.delta_bar = abs_delta_sum / static_cast<double>(T - 1);
    m.v_bar = T >= 3 ? persistent / static_cast<double>(T - 2) : 0.0;
    return m;
}

}  // namespace ehs
