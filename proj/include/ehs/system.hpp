#pragma once

#include "ehs/markov.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ehs {

/// Static parameters of the composed plant: battery size, task buffer size,
/// smoothing grid, and the admissible discharge actions.
struct SystemConfig {
    int q_max = 8;                     ///< battery capacity in energy units
    int w_max = 8;                     ///< backlog capacity in energy units
    int y_levels = 9;                  ///< grid points for the smoothed backlog
    double theta = 0.1;                ///< backlog smoothing factor, in (0,1)
    std::vector<int> actions = {0, 1}; ///< sorted, contains 0, all <= q_max
    double delta_q = 1.0;              ///< physical size of one energy unit

    void validate() const;

    int n_actions() const { return static_cast<int>(actions.size()); }

    /// Uniform grid over [0, w_max] with y_levels points.
    double y_step() const { return static_cast<double>(w_max) / (y_levels - 1); }
    double y_value(int idx) const { return idx * y_step(); }
};

/// One configuration of the composed machine:
/// harvest state, charge, backlog, smoothed-backlog grid index, load state,
/// and the charge-direction flag.
struct SystemState {
    int h = 0;
    int q = 0;
    int w = 0;
    int y_idx = 0;
    int l = 0;
    int lam = 0;
};

/// Dense bijection between SystemState tuples and flat indices.
/// Mixed-radix packing with lam fastest, then l, y, w, q, and h slowest;
/// the ordering is fixed so that LP columns are reproducible.
class StateSpace {
public:
    StateSpace() = default;
    StateSpace(int n_h, int n_q, int n_w, int n_y, int n_l);

    long size() const { return size_; }
    long index_of(const SystemState& z) const;
    SystemState state_of(long index) const;
    bool contains(const SystemState& z) const;

    int n_h() const { return n_h_; }
    int n_q() const { return n_q_; }
    int n_w() const { return n_w_; }
    int n_y() const { return n_y_; }
    int n_l() const { return n_l_; }

private:
    int n_h_ = 0, n_q_ = 0, n_w_ = 0, n_y_ = 0, n_l_ = 0;
    long size_ = 0;
};

/// Controlled transition kernel: a sparse next-state distribution per
/// (state, action), immutable once built.
struct Kernel {
    struct Entry {
        int next;
        double prob;
    };

    int n_states = 0;
    int n_actions = 0;
    std::vector<std::vector<Entry>> rows;  ///< rows[z * n_actions + a]

    const std::vector<Entry>& row(long z, int a) const {
        return rows[static_cast<std::size_t>(z) * n_actions + a];
    }

    /// Checks row mass within 1e-10 and non-negativity.
    void validate() const;
};

/// The full plant: config plus the stochastic drivers on both ends.
struct System {
    SystemConfig config;
    FiniteChain harvest_chain;
    EmissionDist harvest_emission;
    FiniteChain load_chain;
    EmissionDist load_emission;

    /// Throws on invalid members or when chain and emission sizes disagree.
    void validate() const;
    StateSpace state_space() const;
};

/// Charge update: min(max(q - a, 0) + e, q_max). Overflow is clamped to
/// the nearest admissible level; surplus harvest is discarded.
int soc_update(const SystemConfig& config, int q, int a, int e);

/// Backlog update: min(max(w - a, 0) + u, w_max) with the finite-buffer clamp.
int backlog_update(const SystemConfig& config, int w, int a, int u);

/// Smoothing update theta*y + (1-theta)*w mapped to the nearest grid index;
/// exact midpoints round up.
int y_update(const SystemConfig& config, double y, int w);

/// Charge-direction flag: 1 after a net charge, 0 after a net discharge, and
/// the previous flag when the level did not move.
int lambda_update(int q_prev, int q_next, int lam_prev);

/// Enumerates joint emissions and chain transitions for every (state, action)
/// and accumulates the factorized next-state distribution.
Kernel build_kernel(const System& system);

/// Debug export, one "state action next probability" record per line.
void write_kernel_triplets(const Kernel& kernel, std::ostream& out);

}  // namespace ehs
