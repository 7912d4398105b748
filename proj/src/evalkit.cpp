#include "flash/evalkit.hpp"

#include <algorithm>
#include <cmath>

namespace flash::eval {

Likelihood parse_likelihood(std::string_view text) {
    if (text == "unlikely") return Likelihood::unlikely;
    if (text == "somewhat_unlikely") return Likelihood::somewhat_unlikely;
    if (text == "neither") return Likelihood::neither;
    if (text == "somewhat_likely") return Likelihood::somewhat_likely;
    if (text == "likely") return Likelihood::likely;
    throw InputError("unknown assistive likelihood '" + std::string(text) + "'");
}

std::string_view to_string(Likelihood value) {
    switch (value) {
        case Likelihood::unlikely: return "unlikely";
        case Likelihood::somewhat_unlikely: return "somewhat_unlikely";
        case Likelihood::neither: return "neither";
        case Likelihood::somewhat_likely: return "somewhat_likely";
        case Likelihood::likely: return "likely";
    }
    return "neither";
}

std::vector<LabeledPoint> aggregate_labels(const std::vector<LabelRow>& rows) {
    std::map<PointRef, LabeledPoint> by_point;
    for (const LabelRow& row : rows) {
        LabeledPoint& lp = by_point[row.point];
        lp.point = row.point;
        lp.per_rater_warrants[row.rater] = row.warrants;
        if (row.rank) {
            if (*row.rank < 1) throw InputError("label rank must be >= 1");
            lp.per_rater_rank[row.rater] = *row.rank;
        }
        if (row.likelihood) lp.per_rater_likelihood[row.rater] = *row.likelihood;
    }
    std::vector<LabeledPoint> out;
    out.reserve(by_point.size());
    for (auto& [point, lp] : by_point) {
        const auto yes = std::count_if(lp.per_rater_warrants.begin(), lp.per_rater_warrants.end(),
                                       [](const auto& kv) { return kv.second; });
        lp.warrants_investigation = 2 * std::size_t(yes) > lp.per_rater_warrants.size();
        out.push_back(std::move(lp));
    }
    return out;
}

AlgorithmRanking::AlgorithmRanking(std::vector<std::pair<PointRef, double>> scored)
    : entries_(std::move(scored)) {
    std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (entries_[i].first == entries_[i - 1].first) {
            throw InputError("ranking contains a point twice: " + entries_[i].first.region + " " +
                             entries_[i].first.date.iso());
        }
    }
}

std::vector<PointRef> AlgorithmRanking::order() const {
    std::vector<PointRef> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.first);
    return out;
}

std::size_t AlgorithmRanking::rank_of(const PointRef& point) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].first == point) return i + 1;
    }
    throw LookupError("point not ranked: " + point.region + " " + point.date.iso());
}

AlgorithmRanking AlgorithmRanking::restricted_to(const std::set<PointRef>& subset) const {
    AlgorithmRanking out;
    for (const auto& e : entries_) {
        if (subset.count(e.first)) out.entries_.push_back(e);
    }
    return out;
}

std::set<PointRef> binarize_topk(const AlgorithmRanking& ranking, std::size_t k) {
    if (k == 0 || k > ranking.size()) {
        throw InputError("binarize_topk: k must be in [1, " + std::to_string(ranking.size()) + "]");
    }
    std::set<PointRef> out;
    for (std::size_t i = 0; i < k; ++i) out.insert(ranking.entries()[i].first);
    return out;
}

BinaryMetrics binary_metrics(const std::set<PointRef>& predicted, const std::set<PointRef>& truth,
                             const AlgorithmRanking& universe) {
    std::set<PointRef> all;
    for (const auto& e : universe.entries()) all.insert(e.first);
    for (const auto& t : truth) {
        if (!all.count(t)) throw InputError("binary_metrics: truth point outside universe");
    }
    double tp = 0, fp = 0, tn = 0, fn = 0;
    for (const auto& p : all) {
        const bool pos = truth.count(p) != 0;
        const bool hit = predicted.count(p) != 0;
        if (pos && hit) ++tp;
        else if (pos) ++fn;
        else if (hit) ++fp;
        else ++tn;
    }
    BinaryMetrics m;
    const double n = double(all.size());
    m.accuracy = n > 0 ? (tp + tn) / n : 0.0;
    if (2 * tp + fp + fn > 0) m.f1 = 2 * tp / (2 * tp + fp + fn);

    const double positives = tp + fn;
    const double negatives = fp + tn;
    if (positives == 0 || negatives == 0) return m;
    m.balanced_accuracy = 0.5 * (tp / positives + tn / negatives);

    // Mann-Whitney form with midranks over ascending scores.
    std::vector<std::pair<double, bool>> scored;
    for (const auto& e : universe.entries()) scored.emplace_back(e.second, truth.count(e.first) != 0);
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < scored.size();) {
        std::size_t j = i;
        while (j < scored.size() && scored[j].first == scored[i].first) ++j;
        const double midrank = 0.5 * double(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) {
            if (scored[t].second) rank_sum += midrank;
        }
        i = j;
    }
    m.roc_auc = (rank_sum - positives * (positives + 1) / 2) / (positives * negatives);
    return m;
}

double rank_biased_overlap(const std::vector<PointRef>& a, const std::vector<PointRef>& b,
                           double persistence) {
    if (a.size() != b.size()) {
        throw InputError("rank_biased_overlap: lists must have equal length");
    }
    if (!(persistence > 0.0 && persistence < 1.0)) {
        throw InputError("rank_biased_overlap: persistence must be in (0, 1)");
    }
    const std::size_t k = a.size();
    if (k == 0) return 1.0;
    std::set<PointRef> seen_a, seen_b;
    double overlap = 0.0;
    double sum = 0.0;
    double weight = 1.0;
    for (std::size_t d = 1; d <= k; ++d) {
        const PointRef& x = a[d - 1];
        const PointRef& y = b[d - 1];
        if (x == y) {
            overlap += 1;
        } else {
            if (seen_b.count(x)) overlap += 1;
            if (seen_a.count(y)) overlap += 1;
        }
        seen_a.insert(x);
        seen_b.insert(y);
        weight *= persistence;
        sum += overlap / double(d) * weight;
    }
    return overlap / double(k) * weight + (1 - persistence) / persistence * sum;
}

std::optional<double> kendall_tau_b(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw InputError("kendall_tau_b: rank vectors differ in length");
    }
    const std::size_t n = a.size();
    if (n < 2) return std::nullopt;
    double concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double da = a[i] - a[j];
            const double db = b[i] - b[j];
            if (da == 0 && db == 0) continue;
            if (da == 0) ++ties_a;
            else if (db == 0) ++ties_b;
            else if ((da > 0) == (db > 0)) ++concordant;
            else ++discordant;
        }
    }
    const double denom = std::sqrt((concordant + discordant + ties_a) * (concordant + discordant + ties_b));
    if (denom == 0) return std::nullopt;
    return (concordant - discordant) / denom;
}

RankingMetrics ranking_metrics(const std::vector<PointRef>& algorithm_order,
                               const std::map<PointRef, int>& rater_ranks, double persistence) {
    if (algorithm_order.size() != rater_ranks.size()) {
        throw InputError("ranking_metrics: orders cover different point sets");
    }
    for (const auto& p : algorithm_order) {
        if (!rater_ranks.count(p)) throw InputError("ranking_metrics: orders cover different point sets");
    }
    std::vector<PointRef> rater_order;
    for (const auto& kv : rater_ranks) rater_order.push_back(kv.first);
    std::stable_sort(rater_order.begin(), rater_order.end(), [&](const auto& x, const auto& y) {
        return rater_ranks.at(x) < rater_ranks.at(y);
    });

    RankingMetrics m;
    const std::size_t n = algorithm_order.size();
    if (n > 0) {
        std::size_t differing = 0;
        for (std::size_t i = 0; i < n; ++i) differing += algorithm_order[i] == rater_order[i] ? 0 : 1;
        m.hamming = double(differing) / double(n);
    }
    m.rbo = rank_biased_overlap(algorithm_order, rater_order, persistence);

    std::vector<double> algo_ranks, rater_values;
    for (std::size_t i = 0; i < n; ++i) {
        algo_ranks.push_back(double(i + 1));
        rater_values.push_back(double(rater_ranks.at(algorithm_order[i])));
    }
    m.swap_corr = kendall_tau_b(algo_ranks, rater_values);
    return m;
}

std::optional<double> assistive_rank(const AlgorithmRanking& ranking,
                                     const std::vector<LabeledPoint>& labels) {
    double total = 0.0;
    std::size_t selected = 0;
    for (const LabeledPoint& lp : labels) {
        if (!lp.warrants_investigation) continue;
        std::size_t answered = 0, missed = 0;
        for (const auto& [rater, likelihood] : lp.per_rater_likelihood) {
            auto w = lp.per_rater_warrants.find(rater);
            if (w == lp.per_rater_warrants.end() || !w->second) continue;
            ++answered;
            if (likelihood == Likelihood::unlikely || likelihood == Likelihood::somewhat_unlikely) ++missed;
        }
        if (answered == 0 || 10 * missed < 4 * answered) continue;
        total += double(ranking.rank_of(lp.point));
        ++selected;
    }
    if (selected == 0) return std::nullopt;
    return total / double(selected);
}

std::vector<CopelandEntry> copeland_aggregate(const std::vector<std::map<PointRef, int>>& rankings) {
    std::set<PointRef> items;
    for (const auto& r : rankings) {
        for (const auto& kv : r) items.insert(kv.first);
    }
    const std::vector<PointRef> list(items.begin(), items.end());
    std::vector<int> score(list.size(), 0);
    for (std::size_t i = 0; i < list.size(); ++i) {
        for (std::size_t j = i + 1; j < list.size(); ++j) {
            int prefer_i = 0, prefer_j = 0;
            for (const auto& r : rankings) {
                auto a = r.find(list[i]);
                auto b = r.find(list[j]);
                if (a == r.end() || b == r.end()) continue;
                if (a->second < b->second) ++prefer_i;
                else if (b->second < a->second) ++prefer_j;
            }
            if (prefer_i > prefer_j) {
                ++score[i];
                --score[j];
            } else if (prefer_j > prefer_i) {
                ++score[j];
                --score[i];
            }
        }
    }
    std::vector<CopelandEntry> out;
    for (std::size_t i = 0; i < list.size(); ++i) out.push_back({list[i], score[i], 1});
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.score > b.score; });
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].rank = (i > 0 && out[i].score == out[i - 1].score) ? out[i - 1].rank : int(i + 1);
    }
    return out;
}

}  // namespace flash::eval
