// ehsctl: solve, simulate, sweep, and validate-walk drivers around the ehs
// library. All outputs are CSV; see README for the schemas.

#include "ehs/cli.hpp"
#include "ehs/config.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    std::int64_t horizon = -1;
    std::int64_t runs = -1;
};

void add_common(CLI::App* cmd, CommonArgs* args, bool needs_config) {
    auto* config_opt = cmd->add_option("--config", args->config_path, "experiment config (JSON)");
    if (needs_config) config_opt->required();
    cmd->add_option("--out", args->out_dir, "output directory")
        ->envname("EHSCTL_OUT_DIR")
        ->default_val(".");
    cmd->add_option("--seed", args->seed, "override sim.seed");
    cmd->add_option("--horizon", args->horizon, "override sim.horizon");
    cmd->add_option("--runs", args->runs, "override sim.runs");
}

ehs::ExperimentConfig load_with_overrides(const CommonArgs& args) {
    ehs::ExperimentConfig config = ehs::load_experiment_config(args.config_path);
    if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
    if (args.horizon >= 0) config.horizon = args.horizon;
    if (args.runs >= 0) config.runs = args.runs;
    config.validate();
    return config;
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> grid;
    std::stringstream stream(csv);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.empty()) continue;
        grid.push_back(std::stod(item));
    }
    return grid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"energy-harvesting battery aging: CMDP solver and simulator"};
    app.require_subcommand(1);

    CommonArgs solve_args, sim_args, sweep_args;
    std::string policy_path;
    std::string sweep_param;
    std::string sweep_grid;

    CLI::App* solve = app.add_subcommand("solve", "solve the CMDP and write the policy");
    add_common(solve, &solve_args, true);

    CLI::App* simulate = app.add_subcommand("simulate", "roll out a solved policy");
    add_common(simulate, &sim_args, true);
    simulate->add_option("--policy", policy_path, "policy file from solve")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "sweep phi_l or b_l and compare variants");
    add_common(sweep, &sweep_args, true);
    sweep->add_option("--param", sweep_param, "phi_l or b_l")->required();
    sweep->add_option("--grid", sweep_grid, "comma-separated values")->required();

    CommonArgs walk_args;
    ehs::WalkGrid walk_grid;
    std::string walk_p = "0.5,0.7,0.9";
    std::string walk_delta = "1,3";
    CLI::App* walk = app.add_subcommand("validate-walk", "persistent-walk variance check");
    add_common(walk, &walk_args, false);
    walk->add_option("--p", walk_p, "persistence values, comma-separated");
    walk->add_option("--delta-max", walk_delta, "max amplitudes, comma-separated");
    walk->add_option("--tau", walk_grid.tau, "walk length in steps");
    walk->add_option("--samples", walk_grid.samples, "independent walks per cell");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            return ehs::run_solve(load_with_overrides(solve_args), solve_args.out_dir);
        }
        if (simulate->parsed()) {
            return ehs::run_simulate(load_with_overrides(sim_args), policy_path, sim_args.out_dir);
        }
        if (sweep->parsed()) {
            return ehs::run_sweep(load_with_overrides(sweep_args), sweep_param,
                                  parse_grid(sweep_grid), sweep_args.out_dir);
        }
        if (walk->parsed()) {
            walk_grid.p_values = parse_grid(walk_p);
            walk_grid.delta_max_values.clear();
            for (double v : parse_grid(walk_delta)) {
                walk_grid.delta_max_values.push_back(static_cast<int>(v));
            }
            if (walk_args.seed >= 0) walk_grid.seed = static_cast<std::uint64_t>(walk_args.seed);
            return ehs::run_validate_walk(walk_grid, walk_args.out_dir);
        }
    } catch (const ehs::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return ehs::kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return ehs::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return ehs::kExitNumericalError;
    }
    return ehs::kExitOk;
}
