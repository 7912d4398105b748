#include "flash/synthetic.hpp"

#include <algorithm>
#include <cstdio>

namespace flash::synth {

RegionRegistry make_registry(int states, int territories, int counties, std::uint64_t seed) {
    if (states < 1 || territories < 0 || territories >= states || counties < 0) {
        throw InputError("make_registry: need at least one non-territory state");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log_pop(std::log(2e3), std::log(2e6));

    RegionRegistry reg;
    char code[32];
    std::vector<std::int64_t> state_pop(std::size_t(states), 0);
    std::vector<std::int64_t> county_pop(static_cast<std::size_t>(counties));
    for (auto& p : county_pop) p = std::int64_t(std::exp(log_pop(rng)));
    const int proper = states - territories;
    for (int c = 0; c < counties; ++c) state_pop[std::size_t(c % proper)] += county_pop[std::size_t(c)];
    for (int s = proper; s < states; ++s) state_pop[std::size_t(s)] = std::int64_t(std::exp(log_pop(rng)));
    std::int64_t nation = 0;
    for (auto p : state_pop) nation += std::max<std::int64_t>(p, 1);

    reg.add({"US", RegionLevel::nation, std::nullopt}, nation);
    for (int s = 0; s < states; ++s) {
        std::snprintf(code, sizeof code, "S%02d", s + 1);
        reg.add({code, s < proper ? RegionLevel::state : RegionLevel::territory, "US"},
                std::max<std::int64_t>(state_pop[std::size_t(s)], 1));
    }
    for (int c = 0; c < counties; ++c) {
        char parent[8];
        std::snprintf(parent, sizeof parent, "S%02d", c % proper + 1);
        std::snprintf(code, sizeof code, "C%05d", c + 1);
        reg.add({code, RegionLevel::county, std::string(parent)}, county_pop[std::size_t(c)]);
    }
    return reg;
}

Vector simulate_levels(const StreamSpec& spec, Eigen::Index n, std::mt19937_64& rng) {
    const auto p = Eigen::Index(spec.phi.size());
    const double N = double(spec.population);
    Vector c(n);
    auto draw = [&](double mean) {
        const double q = std::clamp(mean, 0.0, N) / N;
        std::binomial_distribution<std::int64_t> bin(spec.population, q);
        return double(bin(rng));
    };
    for (Eigen::Index t = 0; t < n; ++t) {
        double mean = spec.level;
        if (t >= p) {
            for (Eigen::Index i = 0; i < p; ++i) mean += spec.phi[std::size_t(i)] * (c[t - 1 - i] - spec.level);
        }
        c[t] = draw(mean);
    }
    return c;
}

Vector simulate_counts(const StreamSpec& spec, Date start, Eigen::Index n, std::mt19937_64& rng) {
    Vector c = simulate_levels(spec, n, rng);
    for (Eigen::Index t = 0; t < n; ++t) {
        const double v = std::round(c[t] * spec.weekday[std::size_t(weekday_of(start + t))]);
        c[t] = std::clamp(v, 0.0, double(spec.population));
    }
    return c;
}

std::vector<StreamSeries> make_dataset(const RegionRegistry& registry, Date start, Eigen::Index n,
                                       std::uint64_t seed) {
    std::vector<StreamSeries> out;
    std::mt19937_64 rng(seed);
    const std::array<double, 7> weekday{1.05, 1.1, 1.05, 1.0, 0.95, 0.8, 0.75};
    for (const auto& code : registry.codes()) {
        StreamSpec spec;
        spec.population = registry.population(code);
        spec.level = std::max(5.0, 0.002 * double(spec.population));
        spec.weekday = weekday;
        out.push_back({registry.find(code), spec.population, start, simulate_counts(spec, start, n, rng), 0});
    }
    return out;
}

}  // namespace flash::synth
