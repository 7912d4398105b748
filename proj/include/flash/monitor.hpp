#pragma once

#include "flash/core.hpp"

#include <string_view>
#include <vector>

namespace flash {

inline constexpr double kDefaultKsAlpha = 0.01;
inline constexpr std::int64_t kDefaultRetrainMaxAgeDays = 90;
inline constexpr std::size_t kMinKsSamples = 30;

/// Kolmogorov-Smirnov distance between the empirical CDF of `samples` and U(0, 1).
double ks_statistic(std::vector<double> samples);

/// Asymptotic level-alpha critical value of sqrt(n) * D_n: sqrt(-ln(alpha / 2) / 2).
double ks_critical_value(double alpha);

enum class RetrainDecision { none, drift, scheduled };

std::string_view to_string(RetrainDecision decision);

/// Per-group retraining monitor; a single owner mutates it.
struct MonitorState {
    std::vector<double> pvalues_since_retrain;
    Date last_retrain;
    double alpha = kDefaultKsAlpha;
    std::int64_t max_age_days = kDefaultRetrainMaxAgeDays;

    void record(double p) { pvalues_since_retrain.push_back(p); }
    void mark_retrained(Date when) {
        pvalues_since_retrain.clear();
        last_retrain = when;
    }

    bool operator==(const MonitorState&) const = default;
};

/// Drift when at least 30 p-values have accumulated and the KS distance
/// exceeds c(alpha) / sqrt(n); scheduled once max_age_days have passed.
/// Drift wins when both apply.
RetrainDecision should_retrain(const MonitorState& state, Date today);

}  // namespace flash
