#include "flash/monitor.hpp"

#include <algorithm>
#include <cmath>

namespace flash {

double ks_statistic(std::vector<double> samples) {
    if (samples.empty()) {
        throw InputError("ks_statistic: no samples");
    }
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double x = std::clamp(samples[i], 0.0, 1.0);
        d = std::max({d, double(i + 1) / n - x, x - double(i) / n});
    }
    return d;
}

double ks_critical_value(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InputError("ks_critical_value: alpha must be in (0, 1)");
    }
    return std::sqrt(-std::log(alpha / 2.0) / 2.0);
}

std::string_view to_string(RetrainDecision decision) {
    switch (decision) {
        case RetrainDecision::none: return "none";
        case RetrainDecision::drift: return "drift";
        case RetrainDecision::scheduled: return "scheduled";
    }
    return "none";
}

RetrainDecision should_retrain(const MonitorState& state, Date today) {
    const std::size_t n = state.pvalues_since_retrain.size();
    if (n >= kMinKsSamples) {
        const double d = ks_statistic(state.pvalues_since_retrain);
        if (d > ks_critical_value(state.alpha) / std::sqrt(double(n))) {
            return RetrainDecision::drift;
        }
    }
    if (today - state.last_retrain >= state.max_age_days) {
        return RetrainDecision::scheduled;
    }
    return RetrainDecision::none;
}

}  // namespace flash
