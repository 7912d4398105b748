#pragma once

#include "flash/core.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace flash {

/// Every tunable constant of a deployment. Loaded from a JSON object whose
/// keys match the field names; unknown keys are rejected.
///
///   z_threshold            z-score cutoff for day-of-week/global outliers (> 0)
///   pelt_penalty           "bic" (2 * streams * log T) or a nonnegative number
///   min_spacing            minimum regime length in days (>= 2)
///   ar_lag                 autoregressive lag (>= 1, normally 7)
///   ridge                  ridge term of the AR normal equations (>= 0)
///   ks_alpha               KS retrain significance level in (0, 1)
///   retrain_max_age_days   calendar retrain period (>= 1)
///   short_series_cutoff    streams shorter than this get IQR labels only
///   iqr_multiplier         Tukey fence multiplier (> 0)
///   regions                region metadata CSV, relative to the config file
///   state_dir              default state directory
///   workers                worker threads, 0 = hardware concurrency
struct PipelineConfig {
    double z_threshold = 3.0;
    std::optional<double> pelt_penalty;
    int min_spacing = 28;
    int ar_lag = 7;
    double ridge = 1e-6;
    double ks_alpha = 0.01;
    std::int64_t retrain_max_age_days = 90;
    std::int64_t short_series_cutoff = 60;
    double iqr_multiplier = 1.5;
    std::string regions;
    std::string state_dir;
    unsigned workers = 0;

    /// Throws InputError when a field is outside its documented range.
    void validate() const;
    unsigned worker_count() const;

    bool operator==(const PipelineConfig&) const = default;
};

nlohmann::json to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const nlohmann::json& j);

/// Reads and validates a config file; a relative `regions` path is resolved
/// against the file's directory.
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace flash
