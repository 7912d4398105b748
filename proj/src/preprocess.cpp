#include "flash/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace flash {

namespace {

// Thresholds are inclusive; the slack absorbs rounding in z itself.
bool exceeds(double z, double threshold) {
    return std::abs(z) >= threshold * (1.0 - 1e-12);
}

double median(std::vector<double> v) {
    const std::size_t n = v.size();
    const auto mid = v.begin() + std::ptrdiff_t(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

// Linear-interpolation quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * double(sorted.size() - 1);
    const auto lo = std::size_t(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - double(lo)) * (sorted[hi] - sorted[lo]);
}

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
    Eigen::Index n = 0;
};

template <typename Index>
Moments moments_of(const Eigen::Ref<const Vector>& values, const std::vector<Index>& idx) {
    Moments m;
    m.n = Eigen::Index(idx.size());
    if (idx.empty()) return m;
    for (Index i : idx) m.mean += values[i];
    m.mean /= double(m.n);
    double ss = 0.0;
    for (Index i : idx) ss += (values[i] - m.mean) * (values[i] - m.mean);
    m.sd = std::sqrt(ss / double(m.n));
    return m;
}

std::array<std::vector<Eigen::Index>, 7> weekday_buckets(Eigen::Index n, Date start) {
    std::array<std::vector<Eigen::Index>, 7> buckets;
    const int first = weekday_of(start);
    for (Eigen::Index i = 0; i < n; ++i) {
        buckets[std::size_t((first + i) % 7)].push_back(i);
    }
    return buckets;
}

}  // namespace

double max_attainable_z(Eigen::Index n) { return n < 2 ? 0.0 : std::sqrt(double(n - 1)); }

Imputation clamp_out_of_range(const StreamSeries& series) {
    series.validate();
    const Eigen::Index n = series.length();
    Imputation out{Vector(n), Labels(std::size_t(n))};
    const double ceiling = double(series.population);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = series.values[i];
        double v = x;
        if (is_missing(x)) {
            v = i > 0 ? out.values[i - 1] : 0.0;
        } else if (x < 0.0) {
            v = 0.0;
        } else if (x > ceiling) {
            v = ceiling;
        } else if (!std::isfinite(x)) {
            throw InputError("stream " + series.region.code + ": non-finite value");
        }
        if (v != x) out.labels[std::size_t(i)] = OutlierCategory::out_of_range;
        out.values[i] = v;
    }
    return out;
}

Imputation detect_dow_outliers(const Eigen::Ref<const Vector>& values, Date start,
                               const ZScoreConfig& cfg) {
    const Eigen::Index n = values.size();
    Imputation out{values, Labels(std::size_t(n))};
    const auto buckets = weekday_buckets(n, start);
    const int first = weekday_of(start);

    std::array<std::vector<double>, 7> diffs;
    for (Eigen::Index s = 1; s < n; ++s) {
        diffs[std::size_t((first + s) % 7)].push_back(values[s] - values[s - 1]);
    }

    std::vector<Eigen::Index> flagged;
    std::array<Moments, 7> stats;
    for (std::size_t d = 0; d < 7; ++d) {
        stats[d] = moments_of(values, buckets[d]);
        if (stats[d].sd == 0.0) continue;
        for (Eigen::Index i : buckets[d]) {
            if (exceeds((values[i] - stats[d].mean) / stats[d].sd, cfg.threshold)) {
                flagged.push_back(i);
            }
        }
    }
    std::sort(flagged.begin(), flagged.end());

    for (Eigen::Index t : flagged) {
        const auto d = std::size_t((first + t) % 7);
        double v = 0.0;
        if (t > 0) {
            v = out.values[t - 1] + median(diffs[d]);
        } else {
            std::vector<double> same;
            for (Eigen::Index i : buckets[d]) same.push_back(values[i]);
            v = median(std::move(same));
        }
        out.values[t] = std::max(0.0, v);
        out.labels[std::size_t(t)] = OutlierCategory::day_of_week;
    }
    return out;
}

WeekdayModel fit_weekday_model(const Eigen::Ref<const Vector>& values, Date start) {
    const Eigen::Index n = values.size();
    if (n == 0) {
        throw ModelError("fit_weekday_model: empty regime");
    }
    std::array<double, 7> totals{};
    std::array<double, 7> counts{};
    const int first = weekday_of(start);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto d = std::size_t((first + i) % 7);
        totals[d] += values[i];
        counts[d] += 1.0;
    }

    // Weekdays with no observations carry no information and keep factor 1.
    // Observed weekdays with a zero total get half a count so the factor stays
    // positive.
    std::vector<std::size_t> active;
    int positive = 0;
    for (std::size_t d = 0; d < 7; ++d) {
        if (counts[d] == 0.0) continue;
        if (totals[d] > 0.0) ++positive;
        active.push_back(d);
    }
    if (positive < 2) return WeekdayModel{};
    for (std::size_t d : active) {
        if (totals[d] <= 0.0) totals[d] = 0.5;
    }

    // Parameters: [log mu, eta_0 .. eta_{k-2}] with eta_{k-1} = -sum(eta).
    const auto k = Eigen::Index(active.size());
    double grand = 0.0;
    double cnt = 0.0;
    for (std::size_t d : active) {
        grand += totals[d];
        cnt += counts[d];
    }
    Vector theta = Vector::Zero(k);
    theta[0] = std::log(grand / cnt);

    const auto etas = [&](const Vector& th) {
        Vector eta(k);
        eta.head(k - 1) = th.tail(k - 1);
        eta[k - 1] = -th.tail(k - 1).sum();
        return eta;
    };
    const auto loglik = [&](const Vector& th) {
        const Vector eta = etas(th);
        double ll = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            const auto d = active[std::size_t(j)];
            ll += totals[d] * (th[0] + eta[j]) - counts[d] * std::exp(th[0] + eta[j]);
        }
        return ll;
    };

    for (int iter = 0; iter < 100; ++iter) {
        const Vector eta = etas(theta);
        Vector resid(k);
        Vector lambda(k);
        for (Eigen::Index j = 0; j < k; ++j) {
            const auto d = active[std::size_t(j)];
            lambda[j] = counts[d] * std::exp(theta[0] + eta[j]);
            resid[j] = totals[d] - lambda[j];
        }
        Vector grad(k);
        grad[0] = resid.sum();
        grad.tail(k - 1) = resid.head(k - 1).array() - resid[k - 1];
        if (grad.norm() / grand <= 1e-8) break;

        Matrix info(k, k);
        info(0, 0) = lambda.sum();
        info.block(0, 1, 1, k - 1) = (lambda.head(k - 1).array() - lambda[k - 1]).matrix().transpose();
        info.block(1, 0, k - 1, 1) = info.block(0, 1, 1, k - 1).transpose();
        info.block(1, 1, k - 1, k - 1).setConstant(lambda[k - 1]);
        info.block(1, 1, k - 1, k - 1).diagonal() += lambda.head(k - 1);

        const Vector step = info.ldlt().solve(grad);
        const double current = loglik(theta);
        double scale = 1.0;
        Vector next = theta + step;
        while (loglik(next) < current && scale > 1e-10) {
            scale *= 0.5;
            next = theta + scale * step;
        }
        theta = next;
    }

    WeekdayModel model;
    const Vector eta = etas(theta);
    for (Eigen::Index j = 0; j < k; ++j) {
        model.factors[active[std::size_t(j)]] = std::exp(eta[j]);
    }
    return model;
}

Vector apply_weekday_correction(const Eigen::Ref<const Vector>& values, Date start,
                                const WeekdayModel& model) {
    Vector out(values.size());
    const int first = weekday_of(start);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        out[i] = std::max(0.0, model.correct(values[i], int((first + i) % 7)));
    }
    return out;
}

Imputation detect_global_outliers(const Eigen::Ref<const Vector>& corrected,
                                  const ZScoreConfig& cfg, const Labels* existing) {
    const Eigen::Index n = corrected.size();
    Imputation out{corrected, Labels(std::size_t(n))};
    if (n == 0) return out;
    const double mean = corrected.mean();
    const double sd = std::sqrt((corrected.array() - mean).square().sum() / double(n));
    if (sd == 0.0) return out;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (existing && (*existing)[std::size_t(i)]) continue;
        if (exceeds((corrected[i] - mean) / sd, cfg.threshold)) {
            out.labels[std::size_t(i)] = OutlierCategory::global;
            out.values[i] = mean;
        }
    }
    return out;
}

Labels short_series_outliers(const StreamSeries& series, double iqr_multiplier) {
    Labels labels(std::size_t(series.length()));
    std::vector<double> finite;
    for (Eigen::Index i = 0; i < series.length(); ++i) {
        if (!is_missing(series.values[i])) finite.push_back(series.values[i]);
    }
    if (finite.size() < 4) return labels;
    std::sort(finite.begin(), finite.end());
    const double q1 = quantile_sorted(finite, 0.25);
    const double q3 = quantile_sorted(finite, 0.75);
    const double lo = q1 - iqr_multiplier * (q3 - q1);
    const double hi = q3 + iqr_multiplier * (q3 - q1);
    for (Eigen::Index i = 0; i < series.length(); ++i) {
        const double x = series.values[i];
        if (!is_missing(x) && (x < lo || x > hi)) labels[std::size_t(i)] = OutlierCategory::global;
    }
    return labels;
}

ProcessedSeries process_stream(const StreamSeries& series, const RegimeSegmentation& segmentation,
                               const PreprocessConfig& cfg) {
    ProcessedSeries out;
    out.source = series;
    out.segmentation = segmentation;

    Imputation clamped = clamp_out_of_range(series);
    out.labels = std::move(clamped.labels);
    out.imputed_values = std::move(clamped.values);
    out.weekday_corrected = Vector::Zero(series.length());
    const double ceiling = double(series.population);

    for (const auto& [begin, end] : segmentation.regimes(series.length())) {
        const Eigen::Index len = end - begin;
        const Date regime_start = series.date_at(begin);
        const int first = weekday_of(regime_start);
        RegimeProfile profile;
        profile.begin = begin;
        profile.end = end;

        // Day-of-week statistics of the values the detector saw.
        const auto buckets = weekday_buckets(len, regime_start);
        const Vector seen = out.imputed_values.segment(begin, len);
        for (std::size_t d = 0; d < 7; ++d) {
            const Moments m = moments_of(Eigen::Ref<const Vector>(seen), buckets[d]);
            profile.dow_mean[d] = m.mean;
            profile.dow_sd[d] = m.sd;
        }

        Imputation dow = detect_dow_outliers(seen, regime_start, cfg.zscore);
        for (Eigen::Index i = 0; i < len; ++i) {
            auto& label = out.labels[std::size_t(begin + i)];
            if (label || !dow.labels[std::size_t(i)]) continue;
            label = OutlierCategory::day_of_week;
            out.imputed_values[begin + i] = std::min(dow.values[i], ceiling);
        }

        profile.weekday = fit_weekday_model(out.imputed_values.segment(begin, len), regime_start);
        Vector corrected =
            apply_weekday_correction(out.imputed_values.segment(begin, len), regime_start, profile.weekday);

        // Every point of the regime participates; only unlabeled ones can be flagged.
        Labels regime_labels(out.labels.begin() + std::ptrdiff_t(begin),
                             out.labels.begin() + std::ptrdiff_t(end));
        const Imputation global = detect_global_outliers(corrected, cfg.zscore, &regime_labels);
        profile.corrected_mean = corrected.mean();
        profile.corrected_sd =
            std::sqrt((corrected.array() - profile.corrected_mean).square().sum() / double(len));
        for (Eigen::Index i = 0; i < len; ++i) {
            if (!global.labels[std::size_t(i)]) continue;
            const int wd = int((first + i) % 7);
            const double raw = std::clamp(global.values[i] * profile.weekday.factors[std::size_t(wd)],
                                          0.0, ceiling);
            out.labels[std::size_t(begin + i)] = OutlierCategory::global;
            out.imputed_values[begin + i] = raw;
            corrected[i] = profile.weekday.correct(raw, wd);
        }
        out.weekday_corrected.segment(begin, len) = corrected;
        out.regimes.push_back(profile);
    }
    return out;
}

}  // namespace flash
