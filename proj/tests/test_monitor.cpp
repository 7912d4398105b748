#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flash/monitor.hpp"
#include "oracles.hpp"

#include <random>

using namespace flash;

TEST_CASE("KS statistic examples") {
    std::vector<double> grid;
    for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
    CHECK(ks_statistic(grid) == doctest::Approx(0.1));
    CHECK(ks_statistic(std::vector<double>(20, 0.01)) == doctest::Approx(0.99));
    CHECK(ks_statistic({0.5}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(ks_statistic({}), InputError);
}

TEST_CASE("KS statistic matches the definition") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(1 + rng() % 200);
        for (auto& v : x) v = u(rng) * u(rng);
        CHECK(ks_statistic(x) == doctest::Approx(oracle::ks_uniform(x)).epsilon(1e-14));
    }
}

TEST_CASE("critical value") {
    CHECK(ks_critical_value(0.05) == doctest::Approx(1.3581).epsilon(1e-4));
    CHECK(ks_critical_value(0.01) == doctest::Approx(1.6276).epsilon(1e-4));
    CHECK_THROWS_AS(ks_critical_value(0.0), InputError);
    CHECK_THROWS_AS(ks_critical_value(1.0), InputError);
}

TEST_CASE("retrain decisions") {
    const Date d0 = Date::parse("2021-06-01");
    MonitorState s;
    s.last_retrain = d0;
    CHECK(should_retrain(s, d0 + 10) == RetrainDecision::none);
    CHECK(should_retrain(s, d0 + 91) == RetrainDecision::scheduled);
    CHECK(should_retrain(s, d0 + 90) == RetrainDecision::scheduled);
    CHECK(should_retrain(s, d0 + 89) == RetrainDecision::none);

    for (int i = 0; i < 50; ++i) s.record(0.001 * (i + 1) / 6);
    CHECK(should_retrain(s, d0 + 10) == RetrainDecision::drift);
    CHECK(should_retrain(s, d0 + 100) == RetrainDecision::drift);
    s.mark_retrained(d0 + 100);
    CHECK(s.pvalues_since_retrain.empty());
    CHECK(s.last_retrain == d0 + 100);
    CHECK(should_retrain(s, d0 + 101) == RetrainDecision::none);

    // Fewer than 30 p-values never signal drift.
    for (int i = 0; i < 29; ++i) s.record(0.001);
    CHECK(should_retrain(s, d0 + 101) == RetrainDecision::none);
    s.record(0.001);
    CHECK(should_retrain(s, d0 + 101) == RetrainDecision::drift);
}

TEST_CASE("uniform p-values trigger at about the configured rate") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int triggers = 0;
    const int trials = 1000;
    for (int trial = 0; trial < trials; ++trial) {
        MonitorState s;
        s.alpha = 0.05;
        s.last_retrain = Date::parse("2021-01-01");
        for (int i = 0; i < 100; ++i) s.record(u(rng));
        triggers += should_retrain(s, Date::parse("2021-01-20")) == RetrainDecision::drift;
    }
    CHECK(std::abs(double(triggers) / trials - 0.05) <= 0.01);
}
