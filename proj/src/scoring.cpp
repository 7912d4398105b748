#include "flash/scoring.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace flash {

namespace {

// Cases where the tail is fixed by the support; returns true when handled.
bool degenerate_tail(double x, std::int64_t n, double p, double& out) {
    if (x < 0.0) {
        out = 1.0;
        return true;
    }
    if (x >= double(n)) {
        out = 0.0;
        return true;
    }
    if (p <= 0.0) {
        out = 0.0;
        return true;
    }
    if (p >= 1.0) {
        out = 1.0;
        return true;
    }
    return false;
}

void check_inputs(std::int64_t population, double p) {
    if (population < 1) {
        throw InputError("binomial tail: population must be >= 1");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw InputError("binomial tail: probability outside [0, 1]");
    }
}

}  // namespace

double binom_tail_exact(double observed, std::int64_t population, double p) {
    check_inputs(population, p);
    const double x = std::floor(observed);
    double out = 0.0;
    if (degenerate_tail(x, population, p, out)) return out;

    const double n = double(population);
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    const double lgn = std::lgamma(n + 1.0);
    const auto pmf = [&](double j) {
        return std::exp(lgn - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) + j * log_p +
                        (n - j) * log_q);
    };

    // Sum whichever tail lies away from the mean so the smaller one is formed
    // directly, walking outward; past the mode terms only shrink, so stop once
    // they no longer change the sum.
    const auto k = std::int64_t(x);
    const double mode = std::floor((n + 1.0) * p);
    double sum = 0.0;
    if (x + 1.0 >= n * p) {
        for (std::int64_t j = k + 1; j <= population; ++j) {
            const double term = pmf(double(j));
            sum += term;
            if (double(j) > mode && term <= sum * 1e-17) break;
        }
        return std::min(1.0, sum);
    }
    for (std::int64_t j = k; j >= 0; --j) {
        const double term = pmf(double(j));
        sum += term;
        if (double(j) < mode && term <= sum * 1e-17) break;
    }
    return std::clamp(1.0 - sum, 0.0, 1.0);
}

double binom_tail_approx(double observed, std::int64_t population, double p) {
    check_inputs(population, p);
    const double x = std::floor(observed);
    double out = 0.0;
    if (degenerate_tail(x, population, p, out)) return out;
    // P(D >= x + 1) = I_p(x + 1, n - x).
    return boost::math::ibeta(x + 1.0, double(population) - x, p);
}

double binom_stat(double observed, double predicted, std::int64_t population) {
    if (population < 1) {
        throw InputError("binom_stat: population must be >= 1");
    }
    const double n = double(population);
    const double rate = std::clamp(predicted, 0.0, n) / n;
    return population <= kExactBinomialLimit ? binom_tail_exact(observed, population, rate)
                                             : binom_tail_approx(observed, population, rate);
}

PooledNull build_pooled_null(const std::map<std::string, std::vector<double>>& holdout_stats,
                             const std::vector<std::string>& group, Date built_at) {
    PooledNull null;
    null.built_at = built_at;
    const std::set<std::string> members(group.begin(), group.end());
    null.group.assign(members.begin(), members.end());
    for (const std::string& region : null.group) {
        auto it = holdout_stats.find(region);
        if (it == holdout_stats.end()) continue;
        null.stats.insert(null.stats.end(), it->second.begin(), it->second.end());
    }
    if (null.stats.empty()) {
        throw ModelError("build_pooled_null: no holdout statistics in group");
    }
    std::sort(null.stats.begin(), null.stats.end());
    return null;
}

double empirical_p(double k_realtime, const PooledNull& null) {
    if (null.stats.empty()) {
        throw ModelError("empirical_p: empty pooled null");
    }
    const auto at_most = std::upper_bound(null.stats.begin(), null.stats.end(), k_realtime) -
                         null.stats.begin();
    return (1.0 + double(at_most)) / (double(null.stats.size()) + 2.0);
}

std::vector<FlagRecord> rank_flags(std::vector<FlagRecord> records) {
    std::stable_sort(records.begin(), records.end(), [](const FlagRecord& a, const FlagRecord& b) {
        if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
        if (a.residual_per_capita != b.residual_per_capita) {
            return a.residual_per_capita > b.residual_per_capita;
        }
        return a.region < b.region;
    });
    return records;
}

}  // namespace flash
