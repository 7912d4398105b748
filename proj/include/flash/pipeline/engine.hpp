#pragma once

#include "flash/pipeline/config.hpp"
#include "flash/pipeline/snapshot.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace flash {

/// Builds a fresh snapshot: joint changepoints per sibling group, per-stream
/// outlier processing, AR fit on the training prefix, holdout statistics,
/// pooled nulls and a reset monitor per group. Streams shorter than
/// cfg.short_series_cutoff are kept with IQR labels only. Deterministic in
/// (cfg, registry, data) regardless of cfg.workers.
StateSnapshot train(const PipelineConfig& cfg, const RegionRegistry& registry,
                    const std::vector<StreamSeries>& data);

struct ShortSeriesNote {
    std::string region;
    Date date;
    double value = 0.0;
    bool flagged = false;
};

struct GroupDecision {
    std::string group;
    RetrainDecision decision = RetrainDecision::none;
    std::size_t pvalues = 0;
    double ks = 0.0;
};

struct DayReport {
    Date date;
    std::vector<FlagRecord> flags;  // ranked
    std::vector<ShortSeriesNote> short_series;
    std::vector<GroupDecision> decisions;
    std::vector<std::string> warnings;

    bool retrain_suggested() const;
};

/// Scores one new date for every stream in the snapshot and appends the
/// observations to its history. `observations` maps region code to the
/// reported value; absent regions count as missing days. Throws InputError
/// if `date` is not after a stream's last date.
DayReport score_day(StateSnapshot& snapshot, Date date,
                    const std::map<std::string, double>& observations, const PipelineConfig& cfg);

nlohmann::json to_json(const FlagRecord& flag);
FlagRecord flag_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DayReport& report);

}  // namespace flash
