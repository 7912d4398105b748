#pragma once

#include "flash/core.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace flash {

/// Populations up to this size are scored by exact pmf summation.
inline constexpr std::int64_t kExactBinomialLimit = 10'000;

/// P(D > floor(observed)) for D ~ Bin(population, p), by direct pmf summation.
double binom_tail_exact(double observed, std::int64_t population, double p);

/// The same tail through the regularized incomplete beta function.
double binom_tail_approx(double observed, std::int64_t population, double p);

/// Test statistic k = P(observed < D), D ~ Bin(N, clamp(predicted, 0, N) / N),
/// read as P(D > floor(observed)) on the integer support.
double binom_stat(double observed, double predicted, std::int64_t population);

struct TestStatRecord {
    std::string region;
    Date date;
    double k = 0.0;
    double observed_corrected = 0.0;
    double predicted = 0.0;
};

/// Holdout statistics of a sibling group, kept sorted so content does not
/// depend on the order regions were visited.
struct PooledNull {
    std::vector<std::string> group;
    std::vector<double> stats;
    Date built_at;

    bool operator==(const PooledNull&) const = default;
};

/// Multiset union of the holdout statistics of the regions in `group`.
/// Regions without statistics contribute nothing; an empty union throws.
PooledNull build_pooled_null(const std::map<std::string, std::vector<double>>& holdout_stats,
                             const std::vector<std::string>& group, Date built_at = {});

/// (1 + #{k <= k_T}) / (n + 2), strictly inside (0, 1).
double empirical_p(double k_realtime, const PooledNull& null);

inline double rank_score(double p) { return std::abs(2.0 * p - 1.0); }

struct FlagRecord {
    std::string region;
    Date date;
    double p_value = 0.5;
    double rank_score = 0.0;
    std::optional<OutlierCategory> category;
    double observed = 0.0;       // as reported (NaN when missing)
    double imputed = 0.0;        // after out-of-range handling
    double corrected = 0.0;      // weekday-corrected
    double predicted = 0.0;      // AR prediction, clamped to [0, population]
    double k = 0.0;
    double dow_z = 0.0;
    double global_z = 0.0;
    double residual_per_capita = 0.0;
    bool reviewed = false;
    std::optional<std::string> reviewer_note;
};

/// Descending rank_score; ties by larger per-capita residual, then region code.
std::vector<FlagRecord> rank_flags(std::vector<FlagRecord> records);

}  // namespace flash
