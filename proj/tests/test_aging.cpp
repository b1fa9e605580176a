#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ehs/aging.hpp"
#include "ehs/rng.hpp"

using namespace ehs;

namespace {

System make_reference_system() {
    System sys;
    sys.config = SystemConfig{};
    sys.harvest_chain = build_burst_chain({0.9, 10.0});
    sys.harvest_emission = EmissionDist::point_mass({0, 1});
    sys.load_chain = build_burst_chain({0.8, 12.0});
    sys.load_emission = EmissionDist::point_mass({0, 1});
    return sys;
}

}  // namespace

TEST_CASE("objective cost is f of the grid value") {
    SystemConfig config;
    CHECK(objective_cost(config, SystemState{0, 0, 0, 0, 0, 0}) == 0.0);
    CHECK(objective_cost(config, SystemState{0, 0, 0, 3, 0, 0}) == doctest::Approx(9.0));
    CHECK(objective_cost(config, SystemState{0, 0, 0, 8, 0, 0}) == doctest::Approx(64.0));

    CostOptions linear;
    linear.objective = [](double y) { return y; };
    CHECK(objective_cost(config, SystemState{0, 0, 0, 3, 0, 0}, linear) == doctest::Approx(3.0));
}

TEST_CASE("constraint costs on the reference instantiation") {
    const System sys = make_reference_system();
    const StateSpace space = sys.state_space();
    const Kernel kernel = build_kernel(sys);
    BatteryConstants constants;
    constants.q_nom = 8.0;

    SUBCASE("d1 is the charge level") {
        const long z = space.index_of(SystemState{1, 5, 2, 3, 1, 0});
        const auto d = constraint_costs(sys, space, kernel, constants, z, 0);
        CHECK(d[0] == 5.0);
    }

    SUBCASE("d2 carries the cycle normalization") {
        const long z = space.index_of(SystemState{1, 4, 2, 3, 1, 0});
        const auto d = constraint_costs(sys, space, kernel, constants, z, 1);
        CHECK(d[1] == doctest::Approx((1.0 + 1.0) / 16.0));  // = 0.125

        CostOptions raw;
        raw.normalize_cycles = false;
        const auto d_raw = constraint_costs(sys, space, kernel, constants, z, 1, raw);
        CHECK(d_raw[1] == doctest::Approx(2.0));
    }

    SUBCASE("quiet corner has no charge movement") {
        const long z = space.index_of(SystemState{0, 3, 0, 0, 0, 1});
        const auto d = constraint_costs(sys, space, kernel, constants, z, 0);
        CHECK(d[2] == 0.0);
        CHECK(d[3] == 0.0);  // q' == q, so no persistent-move mass either
    }

    SUBCASE("d3 is the expected step and d4 the persistent-move probability") {
        // h=1 emits one unit surely; idle action from interior charge moves up.
        const long z = space.index_of(SystemState{1, 3, 0, 0, 0, 1});
        const auto d = constraint_costs(sys, space, kernel, constants, z, 0);
        CHECK(d[2] == doctest::Approx(1.0));  // q: 3 -> 4 with probability one
        CHECK(d[3] == doctest::Approx(1.0));  // lam stays 1 while charging

        // Same state with the discharging flag: the move flips the flag.
        const long z0 = space.index_of(SystemState{1, 3, 0, 0, 0, 0});
        const auto d0 = constraint_costs(sys, space, kernel, constants, z0, 0);
        CHECK(d0[2] == doctest::Approx(1.0));
        CHECK(d0[3] == doctest::Approx(0.0));
    }

    SUBCASE("d4 lies in [0,1] everywhere") {
        const CostSpec spec = build_cost_spec(sys, space, kernel, constants);
        CHECK(spec.constraint[3].minCoeff() >= 0.0);
        CHECK(spec.constraint[3].maxCoeff() <= 1.0);
        CHECK(spec.constraint[0].minCoeff() >= 0.0);
        CHECK(spec.constraint[0].maxCoeff() <= sys.config.q_max);
        CHECK(spec.objective.minCoeff() >= 0.0);
    }
}

TEST_CASE("degradation closed form") {
    BatteryConstants constants{1.0, 1.0, 1.0, 1.0, 1000.0, 8.0};

    SUBCASE("constant half-charge trace with zero throughput") {
        const Eigen::VectorXd soc = Eigen::VectorXd::Constant(100, 0.5);
        const Eigen::VectorXd throughput = Eigen::VectorXd::Zero(100);
        const double d = degrade_trace(soc, throughput, constants);
        CHECK(d == doctest::Approx(0.2 * 100.0 / 1000.0).epsilon(1e-14));
    }

    SUBCASE("D=0 removes the mean-SoC exponent") {
        BatteryConstants c2 = constants;
        c2.d_coef = 0.0;
        Eigen::VectorXd soc(4);
        soc << 0.1, 0.9, 0.1, 0.9;
        Eigen::VectorXd throughput(4);
        throughput << 1, 1, 1, 1;
        const double n_cyc = 4.0 / 16.0;
        const double soc_var = 0.16;
        const double soc_dev = 2.0 * std::sqrt(3.0 * soc_var);
        const double d_prime = n_cyc * std::exp(soc_dev - 1.0) + 0.2 * 4.0 / 1000.0;
        CHECK(degrade_trace(soc, throughput, c2) == doctest::Approx(d_prime).epsilon(1e-14));
    }

    SUBCASE("SoC_dev = 1 removes the deviation exponent") {
        // Build a two-level trace whose population variance is exactly 1/12,
        // so 2*sqrt(3/12) = 1.
        const double half_spread = std::sqrt(1.0 / 12.0);
        Eigen::VectorXd soc(2);
        soc << 0.5 - half_spread, 0.5 + half_spread;
        Eigen::VectorXd throughput(2);
        throughput << 8, 8;
        BatteryConstants c3 = constants;
        c3.d_coef = 0.0;
        const double expected = (1.0 + 0.2 * 2.0 / 1000.0);
        CHECK(degrade_trace(soc, throughput, c3) == doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("input validation") {
        const Eigen::VectorXd soc = Eigen::VectorXd::Constant(3, 0.5);
        const Eigen::VectorXd bad_len = Eigen::VectorXd::Zero(2);
        CHECK_THROWS_AS(degrade_trace(soc, bad_len, constants), std::invalid_argument);
        const Eigen::VectorXd one = Eigen::VectorXd::Constant(1, 0.5);
        CHECK_THROWS_AS(degrade_trace(one, one, constants), std::invalid_argument);
        Eigen::VectorXd out_of_range(2);
        out_of_range << 0.5, 1.5;
        CHECK_THROWS_AS(degrade_trace(out_of_range, bad_len, constants), std::invalid_argument);
    }
}

TEST_CASE("degradation monotonicity properties") {
    SplitMix64 rng(7);
    BatteryConstants constants{2.0, 1.5, 1.2, 2.0, 5000.0, 8.0};

    for (int trial = 0; trial < 50; ++trial) {
        const int n = 64;
        Eigen::VectorXd soc(n), throughput(n);
        for (int i = 0; i < n; ++i) {
            soc(i) = 0.2 + 0.4 * rng.next_double();
            throughput(i) = std::floor(3.0 * rng.next_double());
        }

        // Shifting the whole trace up increases degradation when d_coef > 0.
        const double shift = 0.05 + 0.2 * rng.next_double();
        CHECK(degrade_trace((soc.array() + shift).matrix(), throughput, constants) >
              degrade_trace(soc, throughput, constants));

        // Scaling deviations around the mean increases it when b_coef > 0.
        const double mean = soc.mean();
        const Eigen::VectorXd wider = (mean + 1.4 * (soc.array() - mean)).matrix();
        CHECK(degrade_trace(wider, throughput, constants) >=
              degrade_trace(soc, throughput, constants));

        // Zero throughput leaves exactly the calendar term.
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
        const double calendar = 0.2 * constants.c_coef *
                                std::exp(constants.d_coef * (mean - 0.5)) * n / constants.t_life;
        CHECK(degrade_trace(Eigen::VectorXd::Constant(n, mean), zero, constants) ==
              doctest::Approx(calendar).epsilon(1e-12));
    }
}

TEST_CASE("discrete trace metrics") {
    SUBCASE("constant trace") {
        const std::vector<int> q(5, 3), a(5, 0), e(5, 0);
        const DiscreteMetrics m = discrete_metrics(q, a, e, 8.0);
        CHECK(m.q_mu == doctest::Approx(3.0));
        CHECK(m.q_sigma2 == 0.0);
        CHECK(m.delta_bar == 0.0);
        CHECK(m.v_bar == 0.0);
        CHECK(m.n_cyc == 0.0);
    }
    SUBCASE("monotone ramp") {
        const std::vector<int> q{0, 1, 2, 3, 4};
        const std::vector<int> a(5, 0), e{1, 1, 1, 1, 0};
        const DiscreteMetrics m = discrete_metrics(q, a, e, 8.0);
        CHECK(m.delta_bar == doctest::Approx(1.0));
        CHECK(m.v_bar == doctest::Approx(1.0));
        CHECK(m.n_cyc == doctest::Approx(4.0 / 16.0));
    }
    SUBCASE("alternating trace") {
        const std::vector<int> q{2, 3, 2, 3, 2};
        const std::vector<int> a(5, 1), e(5, 1);
        const DiscreteMetrics m = discrete_metrics(q, a, e, 8.0);
        CHECK(m.delta_bar == doctest::Approx(1.0));
        CHECK(m.v_bar == doctest::Approx(0.0));
    }
    SUBCASE("flat slots extend no phase") {
        // +1, 0, +1: the flat middle slot scores 0 but keeps the flag, so the
        // last step still counts as persistent.
        const std::vector<int> q{0, 1, 1, 2};
        const std::vector<int> a(4, 0), e(4, 0);
        const DiscreteMetrics m = discrete_metrics(q, a, e, 8.0);
        CHECK(m.v_bar == doctest::Approx(0.5));  // one of two scored pairs
    }
    SUBCASE("length validation") {
        const std::vector<int> q{1, 2}, a{0}, e{0, 0};
        CHECK_THROWS_AS(discrete_metrics(q, a, e, 8.0), std::invalid_argument);
        const std::vector<int> single{1};
        CHECK_THROWS_AS(discrete_metrics(single, single, single, 8.0), std::invalid_argument);
    }
}

TEST_CASE("bounds validation") {
    AgingBounds bounds;
    CHECK(bounds.n_finite() == 0);
    bounds.c_hat[3] = 1.5;
    CHECK_THROWS_AS(bounds.validate(), std::invalid_argument);
    bounds.c_hat[3] = 0.5;
    bounds.c_hat[0] = 2.0;
    bounds.validate();
    CHECK(bounds.n_finite() == 2);
}
