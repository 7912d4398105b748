#pragma once

#include "flash/pipeline/config.hpp"
#include "flash/pipeline/engine.hpp"
#include "flash/pipeline/snapshot.hpp"

#include <filesystem>

namespace flash {

/// On-disk layout of a deployment:
///
///   config.json     pipeline configuration (regions path relative to the dir)
///   regions.csv     region metadata
///   data.csv        every observation seen so far, training data included
///   snapshot.json   current trained state
///   flags.jsonl     append-only flag and review log
///   reports/        one JSON run report per scored date
struct StateDir {
    std::filesystem::path root;

    std::filesystem::path config() const { return root / "config.json"; }
    std::filesystem::path regions() const { return root / "regions.csv"; }
    std::filesystem::path data() const { return root / "data.csv"; }
    std::filesystem::path snapshot() const { return root / "snapshot.json"; }
    std::filesystem::path flags() const { return root / "flags.jsonl"; }
    std::filesystem::path reports() const { return root / "reports"; }
};

/// Copies config, region metadata and data into `dir`, trains, and writes the snapshot.
StateSnapshot train_into(const StateDir& dir, const PipelineConfig& cfg,
                         const std::filesystem::path& data_path);

/// Retrains from everything stored in `dir` and replaces the snapshot.
StateSnapshot retrain(const StateDir& dir);

/// Scores the observations in `obs_path` (all rows dated `date`), appends
/// them to the stored data, persists flags, report and updated snapshot.
DayReport score_into(const StateDir& dir, Date date, const std::filesystem::path& obs_path);

PipelineConfig load_state_config(const StateDir& dir);

}  // namespace flash
