#pragma once

#include "flash/core.hpp"

#include <array>
#include <random>
#include <vector>

namespace flash::synth {

/// A nation "US", `states` state-level regions (the last `territories` of
/// them territories) and `counties` counties spread round-robin over the
/// non-territory states. Populations are drawn from a seeded log-uniform law.
RegionRegistry make_registry(int states = 56, int territories = 5, int counties = 3284,
                             std::uint64_t seed = 1);

/// Parameters of one simulated count stream. The weekday-free level follows
///   c_t ~ Binomial(N, clamp(m + sum_i phi_i (c_{t-i} - m), 0, N) / N)
/// and the reported value is round(c_t * weekday[wd(t)]) clipped to [0, N].
struct StreamSpec {
    std::int64_t population = 100000;
    double level = 500.0;
    std::array<double, 7> weekday{1, 1, 1, 1, 1, 1, 1};
    std::vector<double> phi{0.5, 0.2};
};

/// Weekday-free levels c_t (length n). The first lags are drawn at `level`.
Vector simulate_levels(const StreamSpec& spec, Eigen::Index n, std::mt19937_64& rng);

/// Reported counts for `n` days starting at `start`.
Vector simulate_counts(const StreamSpec& spec, Date start, Eigen::Index n, std::mt19937_64& rng);

/// One series per region with level proportional to population, a mild
/// shared weekday pattern and independent noise.
std::vector<StreamSeries> make_dataset(const RegionRegistry& registry, Date start, Eigen::Index n,
                                       std::uint64_t seed = 1);

}  // namespace flash::synth
