#pragma once

#include "ehs/aging.hpp"
#include "ehs/markov.hpp"
#include "ehs/sim.hpp"
#include "ehs/system.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ehs {

/// Raised on malformed or invalid configuration input; the message names the
/// offending key. Mapped to exit code 2 by the CLI.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// One experiment: the plant, the degradation model, the bounds, and the
/// simulation defaults. Parsed from a single JSON document.
struct ExperimentConfig {
    SystemConfig system;
    BurstParams harvest_params;
    EmissionDist harvest_emission;
    BurstParams load_params;
    EmissionDist load_emission;
    BatteryConstants battery;
    AgingBounds bounds;
    std::string objective = "square";  ///< "square" or "linear"
    bool normalize_cycles = true;
    double action_tie_break = 1e-6;

    long horizon = 10000;
    long runs = 1000;
    std::uint64_t seed = 1;
    std::string output_dir = ".";

    void validate() const;
    System make_system() const;
    CostOptions make_cost_options() const;
};

/// Parses and validates a config document; errors carry the offending key.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// FNV-1a hash (hex) of the canonical model sections (system, harvest, load):
/// everything a policy's state space depends on, and nothing else. Used to
/// key CSV outputs and to check policy/config compatibility.
std::string config_hash(const ExperimentConfig& config);

/// Hash of an arbitrary string, same encoding as config_hash.
std::string fnv1a_hex(const std::string& text);

}  // namespace ehs
