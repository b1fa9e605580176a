#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ehs/cli.hpp"
#include "ehs/cmdp.hpp"
#include "ehs/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ehs;
namespace fs = std::filesystem;

namespace {

/// Small state space so solve-based tests stay fast.
const char* kTinyConfig = R"json({
  "system": {"q_max": 2, "w_max": 2, "y_levels": 3, "theta": 0.2, "actions": [0, 1]},
  "harvest": {"phi": 0.6, "b": 3.0},
  "load": {"phi": 0.5, "b": 2.0},
  "battery": {"a": 1e-4, "b": 1.0, "c": 1.0, "d": 1.0, "t_life": 1e6, "q_nom": 2.0},
  "bounds": {"mean_charge": null, "cycle_rate": null, "step_amplitude": null, "persistence": null},
  "sim": {"horizon": 4000, "runs": 2, "seed": 9}
})json";

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / fs::path("ehs_cli_test")) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config parsing round trip") {
    const ExperimentConfig config = parse_experiment_config(kTinyConfig);
    CHECK(config.system.q_max == 2);
    CHECK(config.harvest_params.phi == 0.6);
    CHECK(config.load_params.b == 2.0);
    CHECK(config.battery.q_nom == 2.0);
    CHECK(config.bounds.n_finite() == 0);
    CHECK(config.horizon == 4000);
    CHECK(config.runs == 2);
    // default binary emissions
    CHECK(config.harvest_emission.probs(1, 1) == 1.0);
    CHECK(config.harvest_emission.probs(0, 0) == 1.0);
}

TEST_CASE("config errors name the offending key") {
    SUBCASE("missing section") {
        try {
            parse_experiment_config(R"({"system": {"q_max": 2, "w_max": 2, "theta": 0.2}})");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("harvest") != std::string::npos);
        }
    }
    SUBCASE("wrong type") {
        std::string text = kTinyConfig;
        const auto pos = text.find("\"phi\": 0.6");
        text.replace(pos, 10, "\"phi\": \"x\"");
        try {
            parse_experiment_config(text);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("harvest.phi") != std::string::npos);
        }
    }
    SUBCASE("invalid burst parameters") {
        std::string text = kTinyConfig;
        const auto pos = text.find("\"phi\": 0.6, \"b\": 3.0");
        text.replace(pos, 20, "\"phi\": 0.9, \"b\": 1.0");
        CHECK_THROWS_AS(parse_experiment_config(text), ConfigError);
    }
    SUBCASE("not JSON at all") {
        CHECK_THROWS_AS(parse_experiment_config("not json"), ConfigError);
    }
    SUBCASE("bad bound type") {
        std::string text = kTinyConfig;
        const auto pos = text.find("\"cycle_rate\": null");
        text.replace(pos, 18, "\"cycle_rate\": \"no\"");
        CHECK_THROWS_AS(parse_experiment_config(text), ConfigError);
    }
}

TEST_CASE("config hash covers the model sections only") {
    const ExperimentConfig base = parse_experiment_config(kTinyConfig);
    ExperimentConfig same_model = base;
    same_model.seed = 1234;
    same_model.horizon = 99;
    same_model.bounds.c_hat[0] = 1.0;
    CHECK(config_hash(base) == config_hash(same_model));

    ExperimentConfig other = base;
    other.load_params.phi = 0.4;
    CHECK(config_hash(base) != config_hash(other));

    ExperimentConfig other_sys = base;
    other_sys.system.theta = 0.3;
    CHECK(config_hash(base) != config_hash(other_sys));
}

TEST_CASE("solve writes a policy and diagnostics, simulate consumes them") {
    TempDir dir;
    const ExperimentConfig config = parse_experiment_config(kTinyConfig);

    REQUIRE(run_solve(config, dir.path.string()) == kExitOk);
    REQUIRE(fs::exists(dir.path / "policy.txt"));
    REQUIRE(fs::exists(dir.path / "solve_diagnostics.csv"));

    const std::string diag = read_file(dir.path / "solve_diagnostics.csv");
    CHECK(diag.find("config_hash") != std::string::npos);
    CHECK(diag.find("unconstrained") != std::string::npos);
    CHECK(diag.find(config_hash(config)) != std::string::npos);

    REQUIRE(run_simulate(config, (dir.path / "policy.txt").string(), dir.path.string()) ==
            kExitOk);
    REQUIRE(fs::exists(dir.path / "stats.csv"));
    REQUIRE(fs::exists(dir.path / "trace.csv"));

    // two runs -> two stats rows after the comment and header lines
    const std::string stats = read_file(dir.path / "stats.csv");
    CHECK(std::count(stats.begin(), stats.end(), '\n') == 4);

    // byte-identical rerun
    const std::string trace_first = read_file(dir.path / "trace.csv");
    REQUIRE(run_simulate(config, (dir.path / "policy.txt").string(), dir.path.string()) ==
            kExitOk);
    CHECK(read_file(dir.path / "trace.csv") == trace_first);
    CHECK(read_file(dir.path / "stats.csv") == stats);
}

TEST_CASE("simulate rejects a policy with a foreign hash") {
    TempDir dir;
    const ExperimentConfig config = parse_experiment_config(kTinyConfig);
    REQUIRE(run_solve(config, dir.path.string()) == kExitOk);

    ExperimentConfig other = config;
    other.load_params.phi = 0.45;
    other.validate();
    CHECK_THROWS_AS(run_simulate(other, (dir.path / "policy.txt").string(), dir.path.string()),
                    ConfigError);
}

TEST_CASE("zero horizon is a config error") {
    ExperimentConfig config = parse_experiment_config(kTinyConfig);
    config.horizon = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("infeasible bounds exit with the infeasible code") {
    TempDir dir;
    ExperimentConfig config = parse_experiment_config(kTinyConfig);
    config.bounds.c_hat[0] = 0.0;  // mean charge 0 is unattainable with positive harvest
    CHECK(run_solve(config, dir.path.string()) == kExitInfeasible);
}

TEST_CASE("sweep emits one row per grid value and variant") {
    TempDir dir;
    ExperimentConfig config = parse_experiment_config(kTinyConfig);
    config.runs = 1;
    config.horizon = 2000;

    config.bounds.c_hat[0] = 1.0;  // finite mean-charge bound for the variant split
    REQUIRE(run_sweep(config, "phi_l", {0.4, 0.6}, dir.path.string()) == kExitOk);
    const std::string csv = read_file(dir.path / "sweep.csv");
    // comment + header + 2 values x 2 variants
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
    CHECK(csv.find("constrained") != std::string::npos);
    CHECK(csv.find("unconstrained") != std::string::npos);

    // constrained rows never report an average above its bound
    std::istringstream lines(csv);
    std::string line;
    int constrained_rows = 0;
    while (std::getline(lines, line)) {
        if (line.rfind("phi_l", 0) != 0 || line.find(",constrained,") == std::string::npos) {
            continue;
        }
        ++constrained_rows;
        std::vector<std::string> fields;
        std::istringstream split(line);
        std::string field;
        while (std::getline(split, field, ',')) fields.push_back(field);
        const double d1 = std::stod(fields[6]);
        CHECK(d1 <= config.bounds.c_hat[0] + 1e-6);
    }
    CHECK(constrained_rows == 2);

    SUBCASE("empty grid still writes the header") {
        TempDir dir2;
        REQUIRE(run_sweep(config, "phi_l", {}, dir2.path.string()) == kExitOk);
        const std::string empty_csv = read_file(dir2.path / "sweep.csv");
        CHECK(std::count(empty_csv.begin(), empty_csv.end(), '\n') == 2);
    }
    SUBCASE("unknown parameter is rejected") {
        CHECK_THROWS_AS(run_sweep(config, "phi_h", {0.5}, dir.path.string()), ConfigError);
    }
}

TEST_CASE("validate-walk writes one row per grid cell") {
    TempDir dir;
    WalkGrid grid;
    grid.p_values = {0.5, 0.7};
    grid.delta_max_values = {1, 3};
    grid.tau = 200;
    grid.tau_short = 50;
    grid.samples = 2000;
    REQUIRE(run_validate_walk(grid, dir.path.string()) == kExitOk);
    const std::string csv = read_file(dir.path / "walk.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
    CHECK(csv.find("predicted_var") != std::string::npos);
    CHECK(csv.find("empirical_var") != std::string::npos);

    // reruns are byte-identical
    REQUIRE(run_validate_walk(grid, dir.path.string()) == kExitOk);
    CHECK(read_file(dir.path / "walk.csv") == csv);
}
