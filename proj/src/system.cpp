#include "ehs/system.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ehs {

void SystemConfig::validate() const {
    if (q_max < 1) throw std::invalid_argument("SystemConfig: q_max must be >= 1");
    if (w_max < 1) throw std::invalid_argument("SystemConfig: w_max must be >= 1");
    if (y_levels < 2) throw std::invalid_argument("SystemConfig: y_levels must be >= 2");
    if (!(theta > 0.0 && theta < 1.0)) {
        throw std::invalid_argument("SystemConfig: theta must lie in (0,1)");
    }
    if (!(delta_q > 0.0)) throw std::invalid_argument("SystemConfig: delta_q must be positive");
    if (actions.empty()) throw std::invalid_argument("SystemConfig: action set must be non-empty");
    if (!std::is_sorted(actions.begin(), actions.end())) {
        throw std::invalid_argument("SystemConfig: actions must be sorted ascending");
    }
    if (std::adjacent_find(actions.begin(), actions.end()) != actions.end()) {
        throw std::invalid_argument("SystemConfig: actions must be distinct");
    }
    if (std::find(actions.begin(), actions.end(), 0) == actions.end()) {
        throw std::invalid_argument("SystemConfig: action set must contain 0");
    }
    for (int a : actions) {
        if (a < 0 || a > q_max) {
            throw std::invalid_argument("SystemConfig: action " + std::to_string(a) +
                                        " outside [0, q_max]");
        }
    }
}

StateSpace::StateSpace(int n_h, int n_q, int n_w, int n_y, int n_l)
    : n_h_(n_h), n_q_(n_q), n_w_(n_w), n_y_(n_y), n_l_(n_l) {
    if (n_h < 1 || n_q < 1 || n_w < 1 || n_y < 1 || n_l < 1) {
        throw std::invalid_argument("StateSpace: all cardinalities must be >= 1");
    }
    size_ = 2L * n_h * n_q * n_w * n_y * n_l;
}

long StateSpace::index_of(const SystemState& z) const {
    if (!contains(z)) throw std::invalid_argument("StateSpace: state coordinates out of range");
    long idx = z.h;
    idx = idx * n_q_ + z.q;
    idx = idx * n_w_ + z.w;
    idx = idx * n_y_ + z.y_idx;
    idx = idx * n_l_ + z.l;
    idx = idx * 2 + z.lam;
    return idx;
}

SystemState StateSpace::state_of(long index) const {
    if (index < 0 || index >= size_) {
        throw std::invalid_argument("StateSpace: index out of range");
    }
    SystemState z;
    z.lam = static_cast<int>(index % 2);
    index /= 2;
    z.l = static_cast<int>(index % n_l_);
    index /= n_l_;
    z.y_idx = static_cast<int>(index % n_y_);
    index /= n_y_;
    z.w = static_cast<int>(index % n_w_);
    index /= n_w_;
    z.q = static_cast<int>(index % n_q_);
    index /= n_q_;
    z.h = static_cast<int>(index);
    return z;
}

bool StateSpace::contains(const SystemState& z) const {
    return z.h >= 0 && z.h < n_h_ && z.q >= 0 && z.q < n_q_ && z.w >= 0 && z.w < n_w_ &&
           z.y_idx >= 0 && z.y_idx < n_y_ && z.l >= 0 && z.l < n_l_ && (z.lam == 0 || z.lam == 1);
}

void Kernel::validate() const {
    if (rows.size() != static_cast<std::size_t>(n_states) * n_actions) {
        throw std::invalid_argument("Kernel: row count disagrees with dimensions");
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double mass = 0.0;
        for (const Entry& entry : rows[r]) {
            if (entry.prob < 0.0) throw std::invalid_argument("Kernel: negative probability");
            if (entry.next < 0 || entry.next >= n_states) {
                throw std::invalid_argument("Kernel: successor index out of range");
            }
            mass += entry.prob;
        }
        if (std::abs(mass - 1.0) > 1e-10) {
            throw std::invalid_argument("Kernel: row " + std::to_string(r) + " has mass " +
                                        std::to_string(mass));
        }
    }
}

void System::validate() const {
    config.validate();
    harvest_chain.validate();
    harvest_emission.validate();
    load_chain.validate();
    load_emission.validate();
    if (harvest_chain.n_states() != harvest_emission.n_states()) {
        throw std::invalid_argument("System: harvest chain and emission sizes disagree");
    }
    if (load_chain.n_states() != load_emission.n_states()) {
        throw std::invalid_argument("System: load chain and emission sizes disagree");
    }
}

StateSpace System::state_space() const {
    return StateSpace(harvest_chain.n_states(), config.q_max + 1, config.w_max + 1,
                      config.y_levels, load_chain.n_states());
}

int soc_update(const SystemConfig& config, int q, int a, int e) {
    return std::min(std::max(q - a, 0) + e, config.q_max);
}

int backlog_update(const SystemConfig& config, int w, int a, int u) {
    return std::min(std::max(w - a, 0) + u, config.w_max);
}

int y_update(const SystemConfig& config, double y, int w) {
    const double smoothed = config.theta * y + (1.0 - config.theta) * w;
    // floor(x + 1/2) rounds exact midpoints up, which keeps the grid map
    // deterministic across platforms.
    const int idx = static_cast<int>(std::floor(smoothed / config.y_step() + 0.5));
    return std::clamp(idx, 0, config.y_levels - 1);
}

int lambda_update(int q_prev, int q_next, int lam_prev) {
    if (q_next > q_prev) return 1;
    if (q_next < q_prev) return 0;
    return lam_prev;
}

Kernel build_kernel(const System& system) {
    system.validate();
    const StateSpace space = system.state_space();
    const SystemConfig& config = system.config;
    const Eigen::MatrixXd& hp = system.harvest_chain.transition;
    const Eigen::MatrixXd& lp = system.load_chain.transition;
    const Eigen::MatrixXd& he = system.harvest_emission.probs;
    const Eigen::MatrixXd& le = system.load_emission.probs;

    Kernel kernel;
    kernel.n_states = static_cast<int>(space.size());
    kernel.n_actions = config.n_actions();
    kernel.rows.resize(static_cast<std::size_t>(space.size()) * kernel.n_actions);

    std::vector<double> mass(static_cast<std::size_t>(space.size()), 0.0);
    std::vector<long> touched;

    for (long zi = 0; zi < space.size(); ++zi) {
        const SystemState z = space.state_of(zi);
        const double y_val = config.y_value(z.y_idx);
        const int y_next = y_update(config, y_val, z.w);

        for (int ai = 0; ai < kernel.n_actions; ++ai) {
            const int a = config.actions[ai];
            touched.clear();

            for (int e = 0; e <= system.harvest_emission.max_units(); ++e) {
                const double pe = he(z.h, e);
                if (pe == 0.0) continue;
                const int q_next = soc_update(config, z.q, a, e);
                const int lam_next = lambda_update(z.q, q_next, z.lam);
                for (int u = 0; u <= system.load_emission.max_units(); ++u) {
                    const double pu = le(z.l, u);
                    if (pu == 0.0) continue;
                    const int w_next = backlog_update(config, z.w, a, u);
                    for (int h_next = 0; h_next < space.n_h(); ++h_next) {
                        const double ph = hp(z.h, h_next);
                        if (ph == 0.0) continue;
                        for (int l_next = 0; l_next < space.n_l(); ++l_next) {
                            const double pl = lp(z.l, l_next);
                            if (pl == 0.0) continue;
                            const SystemState nz{h_next, q_next, w_next, y_next, l_next, lam_next};
                            const long ni = space.index_of(nz);
                            if (mass[ni] == 0.0) touched.push_back(ni);
                            mass[ni] += pe * pu * ph * pl;
                        }
                    }
                }
            }

            std::sort(touched.begin(), touched.end());
            auto& row = kernel.rows[static_cast<std::size_t>(zi) * kernel.n_actions + ai];
            row.reserve(touched.size());
            for (long ni : touched) {
                row.push_back({static_cast<int>(ni), mass[ni]});
                mass[ni] = 0.0;
            }
        }
    }
    return kernel;
}

void write_kernel_triplets(const Kernel& kernel, std::ostream& out) {
    char line[96];
    for (int z = 0; z < kernel.n_states; ++z) {
        for (int a = 0; a < kernel.n_actions; ++a) {
            for (const Kernel::Entry& entry : kernel.row(z, a)) {
                std::snprintf(line, sizeof(line), "%d %d %d %.17g\n", z, a, entry.next, entry.prob);
                out << line;
            }
        }
    }
}

}  // namespace ehs
