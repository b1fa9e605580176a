#include "ehs/cli.hpp"

#include "ehs/cmdp.hpp"
#include "ehs/rng.hpp"
#include "ehs/sim.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace ehs {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string bound_str(double v) {
    return std::isfinite(v) ? fmt(v) : std::string("inf");
}

std::ofstream open_csv(const std::string& out_dir, const std::string& name) {
    std::filesystem::create_directories(out_dir);
    const auto path = std::filesystem::path(out_dir) / name;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("config error: cannot write " + path.string());
    return out;
}

struct SolveOutput {
    CmdpResult result;
    System system;
    StateSpace space;
    Kernel kernel;
    CostSpec costs;
};

SolveOutput solve_from_config(const ExperimentConfig& config, const AgingBounds& bounds) {
    SolveOutput out;
    out.system = config.make_system();
    out.space = out.system.state_space();
    out.kernel = build_kernel(out.system);
    out.costs = build_cost_spec(out.system, out.space, out.kernel, config.battery,
                                config.make_cost_options());
    out.result = solve_cmdp(out.kernel, out.costs, bounds);
    return out;
}

void write_diagnostics_row(std::ostream& out, const ExperimentConfig& config,
                           const CmdpResult& result, const std::string& variant) {
    const auto& d = result.diagnostics;
    out << config_hash(config) << "," << variant << ",";
    switch (result.status) {
        case CmdpStatus::kOptimal: out << "optimal"; break;
        case CmdpStatus::kInfeasible: out << "infeasible"; break;
        case CmdpStatus::kUnbounded: out << "unbounded"; break;
    }
    out << "," << fmt(d.objective);
    for (int k = 0; k < 4; ++k) out << "," << fmt(d.achieved[static_cast<std::size_t>(k)]);
    for (int k = 0; k < 4; ++k) out << "," << bound_str(d.bounds[static_cast<std::size_t>(k)]);
    for (int k = 0; k < 4; ++k) out << "," << (d.binding[static_cast<std::size_t>(k)] ? 1 : 0);
    out << "," << d.lp_iterations << "," << d.randomized_states << ","
        << (d.recurrent_class_reached ? 1 : 0) << "\n";
}

constexpr const char* kDiagnosticsHeader =
    "config_hash,variant,status,objective,d1,d2,d3,d4,"
    "bound1,bound2,bound3,bound4,binding1,binding2,binding3,binding4,"
    "lp_iterations,randomized_states,recurrent_class_reached";

void write_stats_row(std::ostream& out, const std::string& hash, const TraceStats& stats) {
    out << hash << "," << stats.seed << "," << stats.horizon << "," << stats.warmup << ","
        << fmt(stats.q_mean) << "," << fmt(stats.q_std) << "," << fmt(stats.w_mean) << ","
        << fmt(stats.w_std) << "," << fmt(stats.saturation_frac) << "," << fmt(stats.soc_avg)
        << "," << fmt(stats.soc_std) << "," << fmt(stats.soc_dev) << ","
        << fmt(stats.degradation) << "," << fmt(stats.metrics.n_cyc) << ","
        << fmt(stats.metrics.delta_bar) << "," << fmt(stats.metrics.v_bar) << ","
        << fmt(stats.avg_objective.mean) << "," << fmt(stats.avg_charge.mean) << ","
        << fmt(stats.avg_cycle_cost.mean) << "\n";
}

constexpr const char* kStatsHeader =
    "config_hash,seed,horizon,warmup,q_mean,q_std,w_mean,w_std,saturation_frac,"
    "soc_avg,soc_std,soc_dev,degradation,n_cyc,delta_bar,v_bar,avg_objective,"
    "avg_charge,avg_cycle_rate";

int status_exit(const CmdpResult& result) {
    switch (result.status) {
        case CmdpStatus::kOptimal: return kExitOk;
        case CmdpStatus::kInfeasible: return kExitInfeasible;
        case CmdpStatus::kUnbounded: return kExitNumericalError;
    }
    return kExitNumericalError;
}

}  // namespace

int run_solve(const ExperimentConfig& config, const std::string& out_dir) {
    const SolveOutput solved = solve_from_config(config, config.bounds);

    auto diag = open_csv(out_dir, "solve_diagnostics.csv");
    diag << "# ehs-solve v1\n" << kDiagnosticsHeader << "\n";
    const bool constrained = config.bounds.n_finite() > 0;
    write_diagnostics_row(diag, config, solved.result,
                          constrained ? "constrained" : "unconstrained");

    if (solved.result.status != CmdpStatus::kOptimal) {
        std::cerr << "solve: " << solved.result.diagnostics.message << "\n";
        return status_exit(solved.result);
    }

    const auto policy_path = std::filesystem::path(out_dir) / "policy.txt";
    std::ofstream policy_out(policy_path, std::ios::trunc);
    if (!policy_out) throw ConfigError("config error: cannot write " + policy_path.string());
    write_policy(solved.result.policy, policy_out, config_hash(config),
                 solved.result.diagnostics.initial_state);
    return kExitOk;
}

int run_simulate(const ExperimentConfig& config, const std::string& policy_path,
                 const std::string& out_dir) {
    std::ifstream policy_in(policy_path);
    if (!policy_in) throw ConfigError("config error: cannot open policy " + policy_path);
    std::string stored_hash;
    long initial_state = 0;
    const Policy policy = read_policy(policy_in, &stored_hash, &initial_state);
    const std::string hash = config_hash(config);
    if (stored_hash != hash) {
        throw ConfigError("config error: policy hash " + stored_hash +
                          " does not match config hash " + hash);
    }

    const System system = config.make_system();
    const StateSpace space = system.state_space();
    if (initial_state < 0 || initial_state >= space.size()) {
        throw ConfigError("config error: policy initial_state out of range");
    }

    auto stats_csv = open_csv(out_dir, "stats.csv");
    stats_csv << "# ehs-stats v1\n" << kStatsHeader << "\n";

    for (long run = 0; run < config.runs; ++run) {
        SimOptions options;
        options.horizon = config.horizon;
        options.seed = substream_seed(config.seed, static_cast<std::uint64_t>(run));
        options.objective = config.make_cost_options().objective;
        options.initial = space.state_of(initial_state);

        Trace trace;
        const bool want_trace = run == 0;
        const TraceStats stats =
            simulate(policy, system, config.battery, options, want_trace ? &trace : nullptr);
        write_stats_row(stats_csv, hash, stats);
        stats_csv.flush();

        if (want_trace) {
            auto trace_csv = open_csv(out_dir, "trace.csv");
            trace_csv << "# ehs-trace v1\n";
            trace_csv << "config_hash,slot,h,q,w,y,l,lambda,action,e,u\n";
            for (std::size_t t = 0; t < trace.size(); ++t) {
                trace_csv << hash << "," << t << "," << trace.h[t] << "," << trace.q[t] << ","
                          << trace.w[t] << "," << fmt(system.config.y_value(trace.y_idx[t])) << ","
                          << trace.l[t] << "," << trace.lam[t] << "," << trace.action[t] << ","
                          << trace.e[t] << "," << trace.u[t] << "\n";
            }
        }
    }
    return kExitOk;
}

int run_sweep(const ExperimentConfig& config, const std::string& param,
              const std::vector<double>& grid, const std::string& out_dir) {
    if (param != "phi_l" && param != "b_l") {
        throw ConfigError("config error: sweep parameter must be phi_l or b_l, got " + param);
    }

    auto csv = open_csv(out_dir, "sweep.csv");
    csv << "# ehs-sweep v1\n";
    csv << "param,value,variant,config_hash,status,objective,d1,d2,d3,d4,"
           "sim_degradation,sim_soc_std,sim_saturation\n";

    int worst = kExitOk;
    for (const double value : grid) {
        ExperimentConfig point = config;
        if (param == "phi_l") {
            point.load_params.phi = value;
        } else {
            point.load_params.b = value;
        }
        point.validate();

        for (const bool constrained : {true, false}) {
            const AgingBounds bounds = constrained ? point.bounds : AgingBounds::unconstrained();
            const SolveOutput solved = solve_from_config(point, bounds);
            const char* variant = constrained ? "constrained" : "unconstrained";

            csv << param << "," << fmt(value) << "," << variant << "," << config_hash(point)
                << ",";
            if (solved.result.status != CmdpStatus::kOptimal) {
                csv << (solved.result.status == CmdpStatus::kInfeasible ? "infeasible"
                                                                        : "unbounded");
                csv << ",,,,,,,,\n";
                csv.flush();
                worst = std::max(worst, status_exit(solved.result));
                continue;
            }

            // Average the simulated curves over the configured runs.
            double degradation = 0.0, soc_std = 0.0, saturation = 0.0;
            for (long run = 0; run < point.runs; ++run) {
                SimOptions options;
                options.horizon = point.horizon;
                options.seed = substream_seed(point.seed, static_cast<std::uint64_t>(run));
                options.objective = point.make_cost_options().objective;
                options.initial =
                    solved.space.state_of(solved.result.diagnostics.initial_state);
                const TraceStats stats =
                    simulate(solved.result.policy, solved.system, point.battery, options);
                degradation += stats.degradation;
                soc_std += stats.soc_std;
                saturation += stats.saturation_frac;
            }
            degradation /= static_cast<double>(point.runs);
            soc_std /= static_cast<double>(point.runs);
            saturation /= static_cast<double>(point.runs);

            const auto& d = solved.result.diagnostics;
            csv << "optimal," << fmt(d.objective);
            for (int k = 0; k < 4; ++k) csv << "," << fmt(d.achieved[static_cast<std::size_t>(k)]);
            csv << "," << fmt(degradation) << "," << fmt(soc_std) << "," << fmt(saturation)
                << "\n";
            csv.flush();
        }
    }
    return worst;
}

int run_validate_walk(const WalkGrid& grid, const std::string& out_dir) {
    auto csv = open_csv(out_dir, "walk.csv");
    csv << "# ehs-walk v1\n";
    csv << "config_hash,p,delta_max,tau,samples,predicted_var,empirical_var,variance_ratio,"
           "ks_stat,tau_short,ks_stat_short\n";

    for (const double p : grid.p_values) {
        for (const int delta_max : grid.delta_max_values) {
            WalkParams params{p, delta_max, grid.tau, grid.samples};
            const std::string hash = fnv1a_hex(
                nlohmann::json({{"p", p},
                                {"delta_max", delta_max},
                                {"tau", grid.tau},
                                {"samples", grid.samples}})
                    .dump());
            const WalkReport report = validate_walk(params, grid.seed);

            WalkParams short_params = params;
            short_params.tau = grid.tau_short;
            const WalkReport short_report = validate_walk(short_params, grid.seed);

            csv << hash << "," << fmt(p) << "," << delta_max << "," << grid.tau << ","
                << grid.samples << "," << fmt(report.predicted_var) << ","
                << fmt(report.empirical_var) << ","
                << fmt(report.empirical_var / report.predicted_var) << ","
                << fmt(report.normality_stat) << "," << grid.tau_short << ","
                << fmt(short_report.normality_stat) << "\n";
            csv.flush();
        }
    }
    return kExitOk;
}

}  // namespace ehs
