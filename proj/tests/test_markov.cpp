#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ehs/markov.hpp"
#include "ehs/rng.hpp"

using namespace ehs;

TEST_CASE("burst chain closed forms") {
    SUBCASE("phi=0.9 b=10") {
        const FiniteChain chain = build_burst_chain({0.9, 10.0});
        CHECK(chain.transition(1, 0) == doctest::Approx(0.1).epsilon(1e-15));
        CHECK(chain.transition(0, 1) == doctest::Approx(0.9).epsilon(1e-15));
        CHECK(chain.transition(1, 1) == doctest::Approx(0.9).epsilon(1e-15));
        CHECK(chain.transition(0, 0) == doctest::Approx(0.1).epsilon(1e-15));
    }
    SUBCASE("phi=0.8 b=12") {
        const FiniteChain chain = build_burst_chain({0.8, 12.0});
        CHECK(chain.transition(1, 0) == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
        CHECK(chain.transition(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("phi=0.5 b=1 alternates") {
        const FiniteChain chain = build_burst_chain({0.5, 1.0});
        CHECK(chain.transition(1, 0) == 1.0);
        CHECK(chain.transition(0, 1) == 1.0);
        CHECK(chain.transition(0, 0) == 0.0);
        CHECK(chain.transition(1, 1) == 0.0);
    }
}

TEST_CASE("burst parameter validation rejects rather than clamps") {
    CHECK_THROWS_AS(build_burst_chain({0.9, 1.0}), std::invalid_argument);  // entry prob 9
    CHECK_THROWS_AS(build_burst_chain({0.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_burst_chain({1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_burst_chain({0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("stationary distribution of burst chains equals phi") {
    CHECK(stationary_distribution(build_burst_chain({0.9, 10.0}))(1) ==
          doctest::Approx(0.9).epsilon(1e-13));
    CHECK(stationary_distribution(build_burst_chain({0.8, 12.0}))(1) ==
          doctest::Approx(0.8).epsilon(1e-13));

    // Property over random valid pairs: pi(1) == phi and pi P == pi, both
    // within 1e-12.
    SplitMix64 rng(42);
    for (int i = 0; i < 100; ++i) {
        const double phi = 0.02 + 0.96 * rng.next_double();
        const double b_min = phi / (1.0 - phi);
        const double b = std::max(1.0, b_min) + 8.0 * rng.next_double();
        BurstParams params{phi, b};
        if (params.entry_prob() > 1.0) continue;
        const FiniteChain chain = build_burst_chain(params);
        const Eigen::VectorXd pi = stationary_distribution(chain);
        CHECK(std::abs(pi(1) - phi) <= 1e-12);
        const double residual =
            (chain.transition.transpose() * pi - pi).cwiseAbs().maxCoeff();
        CHECK(residual <= 1e-12);
        CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("stationary distribution accepts expressions and bigger chains") {
    Eigen::MatrixXd ring = Eigen::MatrixXd::Zero(5, 5);
    for (int i = 0; i < 5; ++i) {
        ring(i, (i + 1) % 5) = 0.7;
        ring(i, (i + 4) % 5) = 0.3;
    }
    const Eigen::VectorXd pi = stationary_distribution(ring * 1.0);
    CHECK(pi.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(pi(i) == doctest::Approx(0.2).epsilon(1e-13));
}

TEST_CASE("reducible chains are rejected") {
    FiniteChain identity{Eigen::MatrixXd::Identity(2, 2)};
    CHECK_THROWS_AS(stationary_distribution(identity), std::invalid_argument);

    Eigen::MatrixXd absorbing(2, 2);
    absorbing << 0.5, 0.5,
                 0.0, 1.0;
    CHECK_THROWS_AS(stationary_distribution(FiniteChain{absorbing}), std::invalid_argument);
}

TEST_CASE("row stochasticity is enforced on construction inputs") {
    Eigen::MatrixXd bad(2, 2);
    bad << 0.5, 0.5001,
           0.5, 0.5;
    CHECK_THROWS_AS(FiniteChain{bad}.validate(), std::invalid_argument);

    Eigen::MatrixXd negative(2, 2);
    negative << 1.1, -0.1,
                0.5, 0.5;
    CHECK_THROWS_AS(FiniteChain{negative}.validate(), std::invalid_argument);
}

TEST_CASE("expected emission") {
    const EmissionDist binary = EmissionDist::point_mass({0, 1});
    CHECK(expected_emission(binary, 1) == 1.0);
    CHECK(expected_emission(binary, 0) == 0.0);

    EmissionDist mixed;
    mixed.probs = Eigen::MatrixXd(1, 3);
    mixed.probs << 0.5, 0.0, 0.5;
    mixed.validate();
    CHECK(expected_emission(mixed, 0) == doctest::Approx(1.0));

    CHECK_THROWS_AS(expected_emission(binary, 2), std::invalid_argument);
    CHECK_THROWS_AS(expected_emission(binary, -1), std::invalid_argument);
}

TEST_CASE("emission distributions must normalize per state") {
    EmissionDist bad;
    bad.probs = Eigen::MatrixXd(2, 2);
    bad.probs << 0.5, 0.49,
                 0.0, 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
