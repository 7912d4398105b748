#pragma once

#include "flash/core.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace flash::eval {

struct PointRef {
    std::string region;
    Date date;

    auto operator<=>(const PointRef&) const = default;
};

enum class Likelihood { unlikely, somewhat_unlikely, neither, somewhat_likely, likely };

Likelihood parse_likelihood(std::string_view text);
std::string_view to_string(Likelihood value);

/// One row of the labels table.
struct LabelRow {
    PointRef point;
    std::string rater;
    bool warrants = false;
    std::optional<int> rank;
    std::optional<Likelihood> likelihood;
};

/// Rater responses for one candidate point.
struct LabeledPoint {
    PointRef point;
    bool warrants_investigation = false;  // strict majority; 50/50 counts as no
    std::map<std::string, bool> per_rater_warrants;
    std::map<std::string, int> per_rater_rank;
    std::map<std::string, Likelihood> per_rater_likelihood;
};

std::vector<LabeledPoint> aggregate_labels(const std::vector<LabelRow>& rows);

/// Points in descending score order; ties broken by point for determinism.
class AlgorithmRanking {
public:
    AlgorithmRanking() = default;
    explicit AlgorithmRanking(std::vector<std::pair<PointRef, double>> scored);

    const std::vector<std::pair<PointRef, double>>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    std::vector<PointRef> order() const;
    /// 1-based position; throws LookupError for points not ranked.
    std::size_t rank_of(const PointRef& point) const;
    /// The ranking restricted to `subset`, order preserved.
    AlgorithmRanking restricted_to(const std::set<PointRef>& subset) const;

private:
    std::vector<std::pair<PointRef, double>> entries_;
};

/// The first k points; k must lie in [1, size].
std::set<PointRef> binarize_topk(const AlgorithmRanking& ranking, std::size_t k);

struct BinaryMetrics {
    double accuracy = 0.0;
    std::optional<double> balanced_accuracy;
    std::optional<double> f1;
    std::optional<double> roc_auc;
};

/// Confusion-matrix metrics over the ranking's points. ROC-AUC uses the
/// continuous scores with midranks for ties; balanced accuracy and AUC are
/// unset when truth is empty or covers everything.
BinaryMetrics binary_metrics(const std::set<PointRef>& predicted, const std::set<PointRef>& truth,
                             const AlgorithmRanking& universe);

struct RankingMetrics {
    double hamming = 0.0;
    double rbo = 0.0;
    std::optional<double> swap_corr;
};

/// Extrapolated rank-biased overlap of two equal-length lists.
double rank_biased_overlap(const std::vector<PointRef>& a, const std::vector<PointRef>& b,
                           double persistence = 0.9);

/// Kendall tau-b of two rank vectors (ties allowed); unset when undefined.
std::optional<double> kendall_tau_b(const std::vector<double>& a, const std::vector<double>& b);

/// Compares an algorithm order against one rater's ranks over the same points.
/// Rater ties are broken by point for the positional metrics.
RankingMetrics ranking_metrics(const std::vector<PointRef>& algorithm_order,
                               const std::map<PointRef, int>& rater_ranks, double persistence = 0.9);

/// Mean 1-based rank of points a majority says warrant investigation and that
/// at least 40% of those raters would likely have missed. Unset when no point
/// qualifies.
std::optional<double> assistive_rank(const AlgorithmRanking& ranking,
                                     const std::vector<LabeledPoint>& labels);

struct CopelandEntry {
    PointRef item;
    int score = 0;  // pairwise-majority wins minus losses
    int rank = 1;   // competition rank; equal scores share it
};

std::vector<CopelandEntry> copeland_aggregate(const std::vector<std::map<PointRef, int>>& rankings);

}  // namespace flash::eval
