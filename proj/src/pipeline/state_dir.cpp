#include "flash/pipeline/state_dir.hpp"

#include "flash/pipeline/flag_store.hpp"
#include "flash/pipeline/ingest.hpp"

#include <fstream>
#include <sstream>

namespace flash {

PipelineConfig load_state_config(const StateDir& dir) { return load_config(dir.config()); }

StateSnapshot train_into(const StateDir& dir, const PipelineConfig& cfg,
                         const std::filesystem::path& data_path) {
    if (cfg.regions.empty()) throw InputError("config: 'regions' path is required");
    const RegionRegistry registry = load_regions(cfg.regions);
    const std::vector<StreamSeries> data = ingest_csv(data_path, registry);

    std::filesystem::create_directories(dir.reports());
    PipelineConfig stored = cfg;
    stored.regions = "regions.csv";
    stored.state_dir = ".";
    write_file_atomic(dir.config(), to_json(stored).dump(2) + "\n");
    std::ostringstream regions;
    write_regions(regions, registry);
    write_file_atomic(dir.regions(), regions.str());
    std::ostringstream rows;
    write_series(rows, data);
    write_file_atomic(dir.data(), rows.str());

    StateSnapshot snap = train(cfg, registry, data);
    save_snapshot(dir.snapshot(), snap);
    return snap;
}

StateSnapshot retrain(const StateDir& dir) {
    const PipelineConfig cfg = load_state_config(dir);
    const RegionRegistry registry = load_regions(dir.regions());
    StateSnapshot snap = train(cfg, registry, ingest_csv(dir.data(), registry));
    save_snapshot(dir.snapshot(), snap);
    return snap;
}

DayReport score_into(const StateDir& dir, Date date, const std::filesystem::path& obs_path) {
    const PipelineConfig cfg = load_state_config(dir);
    const RegionRegistry registry = load_regions(dir.regions());
    const auto rows = read_observations(obs_path, registry);
    std::map<std::string, double> observations;
    for (const auto& obs : rows) {
        if (obs.date != date) {
            throw InputError(obs_path.string() + ":" + std::to_string(obs.line) + ": row dated " +
                             obs.date.iso() + ", expected " + date.iso());
        }
        observations[obs.region] = obs.value;
    }

    StateSnapshot snap = load_snapshot(dir.snapshot());
    const DayReport report = score_day(snap, date, observations, cfg);

    // Stored data must keep one row per (region, date): append the new date only.
    std::ofstream data(dir.data(), std::ios::app);
    if (!data) throw InputError("cannot append to " + dir.data().string());
    for (const auto& obs : rows) {
        const RegionId& r = registry.find(obs.region);
        std::vector<StreamSeries> one{{r, registry.population(obs.region), date,
                                       Vector::Constant(1, obs.value), 0}};
        std::ostringstream line;
        write_series(line, one);
        const std::string text = line.str();
        data << text.substr(text.find('\n') + 1);
    }
    data.close();

    FlagStore(dir.flags()).append_flags(report.flags);
    std::filesystem::create_directories(dir.reports());
    write_file_atomic(dir.reports() / ("score_" + date.iso() + ".json"), to_json(report).dump(2) + "\n");
    save_snapshot(dir.snapshot(), snap);
    return report;
}

}  // namespace flash
