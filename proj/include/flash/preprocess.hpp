#pragma once

#include "flash/changepoint.hpp"
#include "flash/core.hpp"

#include <array>

namespace flash {

/// Points with |z| >= threshold (population standard deviation) are outliers.
///
/// With the population estimator the largest |z| any single point can reach
/// in a bucket of n values is sqrt(n - 1), so a bucket needs at least 10
/// points before a threshold of 3 can flag anything.
struct ZScoreConfig {
    double threshold = 3.0;
};

/// Largest |z| attainable by one point among n under the population estimator.
double max_attainable_z(Eigen::Index n);

/// Multiplicative day-of-week effects with sum(log factor) == 0.
struct WeekdayModel {
    std::array<double, 7> factors{1, 1, 1, 1, 1, 1, 1};

    double correct(double value, int weekday) const { return value / factors[std::size_t(weekday)]; }
    bool operator==(const WeekdayModel&) const = default;
};

/// Values after an imputation pass and the labels that pass assigned.
struct Imputation {
    Vector values;
    Labels labels;
};

/// Clamps negatives to 0 and values above population to population; missing
/// days take the previous (post-imputation) value, or 0 at the head.
Imputation clamp_out_of_range(const StreamSeries& series);

/// Per-weekday z-score outliers within one regime. A flagged point becomes
/// the prior day's value plus the regime median of first differences that
/// end on the same weekday.
Imputation detect_dow_outliers(const Eigen::Ref<const Vector>& values, Date start,
                               const ZScoreConfig& cfg = {});

/// Poisson fit of E[x_t] = mu * factor[weekday(t)] by damped Newton.
WeekdayModel fit_weekday_model(const Eigen::Ref<const Vector>& values, Date start);

/// values[t] / factor[weekday(t)], clipped below at 0.
Vector apply_weekday_correction(const Eigen::Ref<const Vector>& values, Date start,
                                const WeekdayModel& model);

/// Regime-wide z-score outliers of corrected values, imputed with the regime
/// mean. Points already carrying a label in `existing` are left alone.
Imputation detect_global_outliers(const Eigen::Ref<const Vector>& corrected,
                                  const ZScoreConfig& cfg = {}, const Labels* existing = nullptr);

/// Tukey-fence labels for streams too short to model. Quartiles use linear
/// interpolation; fewer than 4 usable points flags nothing.
Labels short_series_outliers(const StreamSeries& series, double iqr_multiplier = 1.5);

/// Summary statistics of one regime, kept so new points can be annotated
/// without reprocessing history.
struct RegimeProfile {
    Eigen::Index begin = 0;
    Eigen::Index end = 0;
    WeekdayModel weekday;
    std::array<double, 7> dow_mean{};
    std::array<double, 7> dow_sd{};
    double corrected_mean = 0.0;
    double corrected_sd = 0.0;

    bool operator==(const RegimeProfile&) const = default;
};

struct ProcessedSeries {
    StreamSeries source;
    Vector imputed_values;
    Labels labels;
    Vector weekday_corrected;
    RegimeSegmentation segmentation;
    std::vector<RegimeProfile> regimes;
};

struct PreprocessConfig {
    ZScoreConfig zscore;
};

/// clamp -> per-regime day-of-week outliers -> per-regime weekday correction
/// -> per-regime global outliers.
ProcessedSeries process_stream(const StreamSeries& series, const RegimeSegmentation& segmentation,
                               const PreprocessConfig& cfg = {});

}  // namespace flash
