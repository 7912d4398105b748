#include "flash/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flash {

std::vector<std::pair<Eigen::Index, Eigen::Index>> RegimeSegmentation::regimes(
    Eigen::Index length) const {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
    Eigen::Index begin = 0;
    for (Eigen::Index cp : changepoints) {
        if (cp <= begin || cp >= length) continue;
        out.emplace_back(begin, cp);
        begin = cp;
    }
    if (length > begin) out.emplace_back(begin, length);
    return out;
}

double default_penalty(Eigen::Index streams, Eigen::Index length) {
    return 2.0 * double(streams) * std::log(double(std::max<Eigen::Index>(length, 2)));
}

JointGaussianCost::JointGaussianCost(const Eigen::Ref<const Matrix>& streams)
    : sums_(streams.rows(), streams.cols() + 1),
      squares_(streams.rows(), streams.cols() + 1),
      length_(streams.cols()) {
    sums_.col(0).setZero();
    squares_.col(0).setZero();
    for (Eigen::Index r = 0; r < streams.rows(); ++r) {
        // Centering keeps the prefix-sum variance formula well conditioned.
        const double mean = streams.row(r).mean();
        for (Eigen::Index t = 0; t < length_; ++t) {
            const double x = streams(r, t) - mean;
            sums_(r, t + 1) = sums_(r, t) + x;
            squares_(r, t + 1) = squares_(r, t) + x * x;
        }
    }
}

double JointGaussianCost::operator()(Eigen::Index begin, Eigen::Index end) const {
    const Eigen::Index n = end - begin;
    if (n < 2) {
        throw ModelError("gaussian cost: segment needs at least 2 points");
    }
    const double dn = double(n);
    double total = 0.0;
    for (Eigen::Index r = 0; r < sums_.rows(); ++r) {
        const double s = sums_(r, end) - sums_(r, begin);
        const double sq = squares_(r, end) - squares_(r, begin);
        const double var = std::max(0.0, (sq - s * s / dn) / dn);
        total += dn * std::log(var + kVarianceFloor);
    }
    return total;
}

RegimeSegmentation pelt_segment(const Eigen::Ref<const Matrix>& streams, double penalty,
                                int min_spacing) {
    if (min_spacing < 2) {
        throw InputError("pelt_segment: min_spacing must be at least 2");
    }
    if (!(penalty >= 0.0) || !std::isfinite(penalty)) {
        throw InputError("pelt_segment: penalty must be finite and nonnegative");
    }
    if (!streams.allFinite()) {
        throw InputError("pelt_segment: streams contain non-finite values");
    }
    RegimeSegmentation result;
    result.min_spacing = min_spacing;
    result.penalty = penalty;

    const Eigen::Index n = streams.cols();
    const Eigen::Index m = min_spacing;
    if (streams.rows() == 0 || n < 2 * m) {
        return result;
    }

    const JointGaussianCost cost(streams);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> best(n + 1, inf);
    std::vector<Eigen::Index> last(n + 1, 0);
    best[0] = -penalty;

    // A candidate pruned at time t can still be the optimum for ends in
    // (t, t + m) because t itself is not yet an admissible split; it is
    // dropped only once t + m is reached.
    struct Candidate {
        Eigen::Index start;
        Eigen::Index expires;
    };
    const Eigen::Index never = std::numeric_limits<Eigen::Index>::max();
    std::vector<Candidate> candidates{{0, never}};
    std::vector<double> totals;

    for (Eigen::Index t = m; t <= n; ++t) {
        const Eigen::Index fresh = t - m;
        if (fresh >= m) candidates.push_back({fresh, never});

        totals.resize(candidates.size());
        double f = inf;
        Eigen::Index arg = 0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const Eigen::Index s = candidates[i].start;
            totals[i] = best[s] + cost(s, t) + penalty;
            if (totals[i] < f) {
                f = totals[i];
                arg = s;
            }
        }
        best[t] = f;
        last[t] = arg;

        const double slack = 1e-9 * (1.0 + std::abs(f));
        std::size_t keep = 0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            Candidate c = candidates[i];
            if (c.expires == never && totals[i] - penalty > f + slack) {
                c.expires = t + m;
            }
            if (c.expires > t + 1 || c.expires == never) candidates[keep++] = c;
        }
        candidates.resize(keep);
    }

    for (Eigen::Index t = last[n]; t > 0; t = last[t]) {
        result.changepoints.push_back(t);
    }
    std::reverse(result.changepoints.begin(), result.changepoints.end());
    return result;
}

std::vector<RegimeSegmentation> segment_ragged(const std::vector<DatedValues>& group,
                                               std::optional<double> penalty, int min_spacing) {
    std::vector<RegimeSegmentation> out(group.size());
    if (group.empty()) return out;

    Date first = group.front().start;
    Date last = group.front().start + (group.front().values.size() - 1);
    for (const auto& g : group) {
        first = std::max(first, g.start);
        last = std::min(last, g.start + (g.values.size() - 1));
    }
    const std::int64_t common = last - first + 1;
    const double pen =
        penalty.value_or(default_penalty(Eigen::Index(group.size()), std::max<std::int64_t>(common, 0)));

    RegimeSegmentation shared;
    shared.min_spacing = min_spacing;
    shared.penalty = pen;
    if (common >= 2 * min_spacing) {
        Matrix aligned(Eigen::Index(group.size()), common);
        for (std::size_t r = 0; r < group.size(); ++r) {
            aligned.row(Eigen::Index(r)) =
                group[r].values.segment(first - group[r].start, common).transpose();
        }
        shared = pelt_segment(aligned, pen, min_spacing);
    }

    for (std::size_t r = 0; r < group.size(); ++r) {
        out[r].min_spacing = min_spacing;
        out[r].penalty = pen;
        const std::int64_t offset = first - group[r].start;
        for (Eigen::Index cp : shared.changepoints) {
            out[r].changepoints.push_back(cp + offset);
        }
    }
    return out;
}

}  // namespace flash
