#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flash/predictor.hpp"
#include "oracles.hpp"

#include <random>

using namespace flash;

namespace {

Vector recurrence(Eigen::Index n, const std::vector<double>& beta, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(50.0, 150.0);
    const auto p = Eigen::Index(beta.size());
    Vector y(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        if (t < p) {
            y[t] = u(rng);
            continue;
        }
        y[t] = 0.0;
        for (Eigen::Index i = 0; i < p; ++i) y[t] += beta[std::size_t(i)] * y[t - 1 - i];
    }
    return y;
}

}  // namespace

TEST_CASE("training split") {
    CHECK(training_split(60) == TrainingSplit{0, 30, 60});
    CHECK(training_split(500) == TrainingSplit{0, 50, 500});
    CHECK(training_split(300) == TrainingSplit{0, 30, 300});
    CHECK(training_split(301) == TrainingSplit{0, 31, 301});
    CHECK(training_split(38).holdout_size() == 8);
    CHECK_THROWS_AS(training_split(37), ModelError);
    CHECK_THROWS_AS(training_split(40, 10), ModelError);
}

TEST_CASE("zero training data gives exactly zero weights") {
    const auto m = fit_ar(Vector::Zero(30));
    CHECK(m.weights == Vector::Zero(7));
    CHECK(predict(m, Vector::Constant(20, 5.0), 10) == 0.0);
}

TEST_CASE("noiseless recurrence is recovered") {
    std::mt19937_64 rng(1);
    const std::vector<double> beta{0.5, 0, 0, 0, 0, 0, 0.25};
    const Vector y = recurrence(60, beta, rng);
    const auto m = fit_ar(y, 1e-12);
    for (int i = 0; i < 7; ++i) CHECK(std::abs(m.weights[i] - beta[std::size_t(i)]) <= 1e-6);
    const Vector y2 = recurrence(90, beta, rng);
    for (Eigen::Index t = 7; t < 90; ++t) CHECK(std::abs(predict(m, y2, t) - y2[t]) <= 1e-9 * std::max(1.0, y2[t]) + 1e-9);
}

TEST_CASE("persistence model predicts yesterday") {
    ARModel m;
    m.weights = Vector::Zero(7);
    m.weights[0] = 1.0;
    Vector y(10);
    y << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10;
    CHECK(predict(m, y, 9) == 9.0);
    CHECK(predict_next(m, y.tail(7)) == 10.0);
    CHECK_THROWS_AS(predict(m, y, 6), ModelError);
    CHECK_THROWS_AS(predict_next(m, y.head(3)), ModelError);
}

TEST_CASE("fit_ar matches an independent normal-equation solve") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 15 + Eigen::Index(rng() % 60);
        Vector y(n);
        for (auto& v : y) v = 100.0 + 20.0 * g(rng);
        const double ridge = trial % 3 == 0 ? 0.0 : 1e-6;
        const auto m = fit_ar(y, ridge);
        const Vector ref = oracle::ar_normal_equations(y, ridge, 7);
        CHECK((m.weights - ref).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
}

TEST_CASE("fit needs lag + 1 rows") {
    CHECK_NOTHROW(fit_ar(Vector::Constant(15, 1.0)));
    CHECK_THROWS_AS(fit_ar(Vector::Constant(14, 1.0)), ModelError);
    CHECK_THROWS_AS(fit_ar(Vector::Constant(30, 1.0), -1.0), InputError);
}

TEST_CASE("predictions are linear in the data") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vector y(60);
        for (auto& v : y) v = 50.0 + 10.0 * g(rng);
        const double alpha = 0.1 + double(trial);
        const auto m1 = fit_ar(y.head(30), 1e-12);
        const Vector ya = alpha * y;
        const auto m2 = fit_ar(ya.head(30), 1e-12);
        for (Eigen::Index t = 30; t < 60; ++t) {
            CHECK(predict(m2, ya, t) == doctest::Approx(alpha * predict(m1, y, t)).epsilon(1e-8));
        }
    }
}

TEST_CASE("fits are bit-identical across runs") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    Vector y(45);
    for (auto& v : y) v = 10.0 + g(rng);
    const auto a = fit_ar(y), b = fit_ar(y);
    CHECK(std::memcmp(a.weights.data(), b.weights.data(), sizeof(double) * 7) == 0);
}
