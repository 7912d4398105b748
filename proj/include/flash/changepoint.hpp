#pragma once

#include "flash/core.hpp"

#include <utility>
#include <vector>

namespace flash {

inline constexpr double kVarianceFloor = 1e-8;
inline constexpr int kDefaultMinSpacing = 28;

/// Changepoints are the first index of each new regime, sorted ascending.
struct RegimeSegmentation {
    std::vector<Eigen::Index> changepoints;
    int min_spacing = kDefaultMinSpacing;
    double penalty = 0.0;

    /// Half-open [begin, end) index ranges of the regimes of a series of `length`.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> regimes(Eigen::Index length) const;

    bool operator==(const RegimeSegmentation&) const = default;
};

/// Gaussian segment cost n * log(var + floor), var the population variance.
template <typename Derived>
typename Derived::Scalar gaussian_cost(const Eigen::MatrixBase<Derived>& segment,
                                       typename Derived::Scalar floor = kVarianceFloor) {
    using Scalar = typename Derived::Scalar;
    const auto n = segment.size();
    if (n < 2) {
        throw ModelError("gaussian_cost: segment needs at least 2 points");
    }
    const Scalar mean = segment.mean();
    const Scalar var = (segment.array() - mean).square().sum() / Scalar(n);
    using std::log;
    return Scalar(n) * log(var + floor);
}

/// BIC-style default: 2 * streams * log(length).
double default_penalty(Eigen::Index streams, Eigen::Index length);

/// Summed Gaussian cost of [begin, end) across the rows of a stream group, O(S) per query.
class JointGaussianCost {
public:
    explicit JointGaussianCost(const Eigen::Ref<const Matrix>& streams);

    double operator()(Eigen::Index begin, Eigen::Index end) const;
    Eigen::Index length() const { return length_; }
    Eigen::Index streams() const { return sums_.rows(); }

private:
    Matrix sums_;     // streams x (T+1) prefix sums of centered values
    Matrix squares_;  // same for squared centered values
    Eigen::Index length_ = 0;
};

/// Exact PELT over a group of aligned streams (one stream per row) sharing one
/// changepoint set. Minimizes sum of joint segment costs plus
/// penalty * (#changepoints) with every regime at least `min_spacing` long.
RegimeSegmentation pelt_segment(const Eigen::Ref<const Matrix>& streams, double penalty,
                                int min_spacing = kDefaultMinSpacing);

/// A stream handed to ragged joint segmentation: first date plus gap-free values.
struct DatedValues {
    Date start;
    Vector values;
};

/// Joint segmentation of streams with differing supports: segments the
/// common date intersection and clips the shared changepoints back to each
/// stream's own index space. Without an explicit penalty, default_penalty is used.
std::vector<RegimeSegmentation> segment_ragged(const std::vector<DatedValues>& group,
                                               std::optional<double> penalty, int min_spacing);

}  // namespace flash
