#pragma once

#include "flash/changepoint.hpp"
#include "flash/monitor.hpp"
#include "flash/pipeline/config.hpp"
#include "flash/predictor.hpp"
#include "flash/preprocess.hpp"
#include "flash/scoring.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace flash {

inline constexpr int kSnapshotVersion = 1;

/// Everything needed to score one stream between retrains. History arrays
/// grow by one entry per scored day.
struct StreamState {
    RegionId region;
    std::int64_t population = 1;
    std::string group;
    bool short_series = false;

    Date start;
    Vector raw;        // as reported; NaN for missing days
    Vector imputed;    // modeled streams only
    Vector corrected;  // modeled streams only
    Labels labels;

    RegimeSegmentation segmentation;
    std::vector<RegimeProfile> regimes;
    ARModel model;
    TrainingSplit split;
    std::vector<double> holdout_predicted;
    std::vector<double> holdout_k;

    Date last_date() const { return start + (raw.size() - 1); }
    bool operator==(const StreamState&) const;
};

struct GroupState {
    std::string key;
    std::vector<std::string> members;
    std::optional<PooledNull> null;
    MonitorState monitor;

    bool operator==(const GroupState&) const = default;
};

struct StateSnapshot {
    int version = kSnapshotVersion;
    Date built_at;
    std::map<std::string, StreamState> streams;
    std::map<std::string, GroupState> groups;

    bool operator==(const StateSnapshot&) const = default;
};

nlohmann::json to_json(const StateSnapshot& snapshot);
/// Throws InputError on schema or version mismatch.
StateSnapshot snapshot_from_json(const nlohmann::json& j);

/// Canonical byte serialization; identical snapshots give identical bytes.
std::string serialize_snapshot(const StateSnapshot& snapshot);
StateSnapshot parse_snapshot(const std::string& bytes);

/// Writes through a temporary file and rename so readers never see a partial file.
void save_snapshot(const std::filesystem::path& path, const StateSnapshot& snapshot);
StateSnapshot load_snapshot(const std::filesystem::path& path);

/// Writes `contents` to `path` atomically.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace flash
