#include "ehs/config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ehs {

using nlohmann::json;

namespace {

/// Field extraction with key-path error messages.
template <typename T>
T require(const json& node, const std::string& path, const std::string& key) {
    if (!node.contains(key)) throw ConfigError("config error at " + path + "." + key + ": missing");
    try {
        return node.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config error at " + path + "." + key + ": " + e.what());
    }
}

template <typename T>
T optional(const json& node, const std::string& path, const std::string& key, T fallback) {
    if (!node.contains(key) || node.at(key).is_null()) return fallback;
    try {
        return node.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config error at " + path + "." + key + ": " + e.what());
    }
}

EmissionDist parse_emissions(const json& node, const std::string& path) {
    if (!node.contains("emissions") || node.at("emissions").is_null()) {
        // Binary burst convention: state 0 emits nothing, state 1 exactly one unit.
        return EmissionDist::point_mass({0, 1});
    }
    const auto table = require<std::vector<std::vector<double>>>(node, path, "emissions");
    if (table.empty()) throw ConfigError("config error at " + path + ".emissions: empty");
    std::size_t width = 1;
    for (const auto& row : table) width = std::max(width, row.size());
    EmissionDist dist;
    dist.probs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(table.size()),
                                       static_cast<Eigen::Index>(width));
    for (std::size_t s = 0; s < table.size(); ++s) {
        for (std::size_t e = 0; e < table[s].size(); ++e) {
            dist.probs(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(e)) = table[s][e];
        }
    }
    try {
        dist.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config error at " + path + ".emissions: " + e.what());
    }
    return dist;
}

double parse_bound(const json& node, const std::string& key) {
    if (!node.contains(key) || node.at(key).is_null()) return AgingBounds::kUnbounded;
    const json& v = node.at(key);
    if (v.is_string()) {
        if (v.get<std::string>() == "inf") return AgingBounds::kUnbounded;
        throw ConfigError("config error at bounds." + key + ": expected number, null, or \"inf\"");
    }
    if (!v.is_number()) {
        throw ConfigError("config error at bounds." + key + ": expected number, null, or \"inf\"");
    }
    return v.get<double>();
}

json canonical_emissions(const EmissionDist& dist) {
    json rows = json::array();
    for (Eigen::Index s = 0; s < dist.probs.rows(); ++s) {
        json row = json::array();
        for (Eigen::Index e = 0; e < dist.probs.cols(); ++e) row.push_back(dist.probs(s, e));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

void ExperimentConfig::validate() const {
    auto wrap = [](const char* section, auto&& fn) {
        try {
            fn();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("config error at " + std::string(section) + ": " + e.what());
        }
    };
    wrap("system", [&] { system.validate(); });
    wrap("harvest", [&] { harvest_params.validate(); });
    wrap("harvest.emissions", [&] { harvest_emission.validate(); });
    wrap("load", [&] { load_params.validate(); });
    wrap("load.emissions", [&] { load_emission.validate(); });
    wrap("battery", [&] { battery.validate(); });
    wrap("bounds", [&] { bounds.validate(); });
    if (objective != "square" && objective != "linear") {
        throw ConfigError("config error at objective: expected \"square\" or \"linear\"");
    }
    if (horizon < 1) throw ConfigError("config error at sim.horizon: must be >= 1");
    if (runs < 1) throw ConfigError("config error at sim.runs: must be >= 1");
    wrap("system+harvest+load", [&] { make_system().validate(); });
}

System ExperimentConfig::make_system() const {
    System sys;
    sys.config = system;
    sys.harvest_chain = build_burst_chain(harvest_params);
    sys.harvest_emission = harvest_emission;
    sys.load_chain = build_burst_chain(load_params);
    sys.load_emission = load_emission;
    return sys;
}

CostOptions ExperimentConfig::make_cost_options() const {
    CostOptions options;
    options.normalize_cycles = normalize_cycles;
    options.action_tie_break = action_tie_break;
    if (objective == "linear") {
        options.objective = [](double y) { return y; };
    } else {
        options.objective = [](double y) { return y * y; };
    }
    return options;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config error: not valid JSON: ") + e.what());
    }

    ExperimentConfig config;

    const json sys = require<json>(root, "", "system");
    config.system.q_max = require<int>(sys, "system", "q_max");
    config.system.w_max = require<int>(sys, "system", "w_max");
    config.system.y_levels = optional<int>(sys, "system", "y_levels", 9);
    config.system.theta = require<double>(sys, "system", "theta");
    config.system.actions = optional<std::vector<int>>(sys, "system", "actions", {0, 1});
    config.system.delta_q = optional<double>(sys, "system", "delta_q", 1.0);

    const json harvest = require<json>(root, "", "harvest");
    config.harvest_params.phi = require<double>(harvest, "harvest", "phi");
    config.harvest_params.b = require<double>(harvest, "harvest", "b");
    config.harvest_emission = parse_emissions(harvest, "harvest");

    const json load = require<json>(root, "", "load");
    config.load_params.phi = require<double>(load, "load", "phi");
    config.load_params.b = require<double>(load, "load", "b");
    config.load_emission = parse_emissions(load, "load");

    const json battery = require<json>(root, "", "battery");
    config.battery.a_coef = require<double>(battery, "battery", "a");
    config.battery.b_coef = require<double>(battery, "battery", "b");
    config.battery.c_coef = require<double>(battery, "battery", "c");
    config.battery.d_coef = require<double>(battery, "battery", "d");
    config.battery.t_life = require<double>(battery, "battery", "t_life");
    config.battery.q_nom = require<double>(battery, "battery", "q_nom");

    if (root.contains("bounds") && !root.at("bounds").is_null()) {
        const json& bounds = root.at("bounds");
        config.bounds.c_hat[0] = parse_bound(bounds, "mean_charge");
        config.bounds.c_hat[1] = parse_bound(bounds, "cycle_rate");
        config.bounds.c_hat[2] = parse_bound(bounds, "step_amplitude");
        config.bounds.c_hat[3] = parse_bound(bounds, "persistence");
    }

    config.objective = optional<std::string>(root, "", "objective", "square");
    config.normalize_cycles = optional<bool>(root, "", "normalize_cycles", true);
    config.action_tie_break = optional<double>(root, "", "action_tie_break", 1e-6);
    if (config.action_tie_break < 0.0) {
        throw ConfigError("config error at action_tie_break: must be >= 0");
    }

    if (root.contains("sim") && !root.at("sim").is_null()) {
        const json& sim = root.at("sim");
        config.horizon = optional<long>(sim, "sim", "horizon", config.horizon);
        config.runs = optional<long>(sim, "sim", "runs", config.runs);
        config.seed = optional<std::uint64_t>(sim, "sim", "seed", config.seed);
    }
    config.output_dir = optional<std::string>(root, "", "output_dir", config.output_dir);

    config.validate();
    return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config error: cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment_config(buffer.str());
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(out);
}

std::string config_hash(const ExperimentConfig& config) {
    json model;
    model["system"] = {{"q_max", config.system.q_max},
                       {"w_max", config.system.w_max},
                       {"y_levels", config.system.y_levels},
                       {"theta", config.system.theta},
                       {"actions", config.system.actions},
                       {"delta_q", config.system.delta_q}};
    model["harvest"] = {{"phi", config.harvest_params.phi},
                        {"b", config.harvest_params.b},
                        {"emissions", canonical_emissions(config.harvest_emission)}};
    model["load"] = {{"phi", config.load_params.phi},
                     {"b", config.load_params.b},
                     {"emissions", canonical_emissions(config.load_emission)}};
    return fnv1a_hex(model.dump());
}

}  // namespace ehs
