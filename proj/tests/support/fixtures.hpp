#pragma once

#include "flash/pipeline/engine.hpp"
#include "flash/pipeline/ingest.hpp"
#include "flash/synthetic.hpp"

#include <filesystem>
#include <random>

namespace fixture {

inline const flash::Date kStart = flash::Date::parse("2021-01-04");

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("flash_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Nation, a few states and counties with `days` of history plus one extra
// simulated day returned separately for scoring.
struct World {
    flash::RegionRegistry registry;
    std::vector<flash::StreamSeries> history;
    std::map<std::string, double> next_day;
    flash::Date next_date;
};

inline World make_world(int states, int territories, int counties, Eigen::Index days, std::uint64_t seed = 1) {
    World w;
    w.registry = flash::synth::make_registry(states, territories, counties, seed);
    auto full = flash::synth::make_dataset(w.registry, kStart, days + 1, seed);
    w.next_date = kStart + days;
    for (auto& s : full) {
        w.next_day[s.region.code] = s.values[days];
        s.values.conservativeResize(days);
        w.history.push_back(std::move(s));
    }
    return w;
}

}  // namespace fixture
