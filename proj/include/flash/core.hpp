#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flash {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error kinds. Everything thrown by the library derives from Error.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Malformed or out-of-contract input data.
struct InputError : Error {
    using Error::Error;
};
// Unknown region, stream or group.
struct LookupError : Error {
    using Error::Error;
};
// A model could not be built from the data it was given.
struct ModelError : Error {
    using Error::Error;
};

/// A civil (timezone-free) calendar date.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
    Date(int year, unsigned month, unsigned day);

    /// Parses an ISO-8601 `YYYY-MM-DD` string; throws InputError otherwise.
    static Date parse(std::string_view iso);

    std::string iso() const;
    std::chrono::sys_days sys_days() const { return days_; }
    std::int64_t serial() const { return days_.time_since_epoch().count(); }

    Date operator+(std::int64_t n) const { return Date(days_ + std::chrono::days(n)); }
    Date operator-(std::int64_t n) const { return Date(days_ - std::chrono::days(n)); }
    std::int64_t operator-(const Date& other) const { return serial() - other.serial(); }

    auto operator<=>(const Date&) const = default;

private:
    std::chrono::sys_days days_{};
};

/// Monday = 0 ... Sunday = 6.
int weekday_of(const Date& date);

enum class RegionLevel { county, state, territory, nation };

std::string_view to_string(RegionLevel level);
RegionLevel parse_region_level(std::string_view text);

struct RegionId {
    std::string code;
    RegionLevel level = RegionLevel::county;
    std::optional<std::string> parent;

    bool is_state_level() const {
        return level == RegionLevel::state || level == RegionLevel::territory;
    }
    bool operator==(const RegionId&) const = default;
};

/// The geographic hierarchy: counties under states, states and territories
/// under the nation. Immutable once built; safe to share between workers.
class RegionRegistry {
public:
    /// Adds a region with its population. Parents must be added first.
    void add(RegionId region, std::int64_t population);

    bool contains(std::string_view code) const;
    const RegionId& find(std::string_view code) const;
    std::int64_t population(std::string_view code) const;

    /// Pooling/segmentation peers of `code`, including itself, sorted by code.
    std::vector<std::string> sibling_group(std::string_view code) const;

    /// Stable identifier of the sibling group (e.g. "counties:NY", "states:US").
    std::string group_key(std::string_view code) const;

    std::vector<std::string> codes() const;
    std::size_t size() const { return entries_.size(); }

private:
    struct Entry {
        RegionId region;
        std::int64_t population = 1;
    };
    const Entry& entry(std::string_view code) const;

    std::map<std::string, Entry, std::less<>> entries_;
};

/// Unreported days are stored in place as NaN so positional lags stay aligned.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

enum class OutlierCategory { out_of_range, global, day_of_week, trendline };

std::string_view to_string(OutlierCategory category);
OutlierCategory parse_outlier_category(std::string_view text);

using Labels = std::vector<std::optional<OutlierCategory>>;

/// One region's contiguous daily count series.
struct StreamSeries {
    RegionId region;
    std::int64_t population = 1;
    Date start;
    Vector values;
    Eigen::Index start_index = 0;

    Eigen::Index length() const { return values.size(); }
    Date date_at(Eigen::Index i) const { return start + i; }
    Date end() const { return start + (values.size() - 1); }

    /// Throws InputError if population < 1.
    void validate() const;
};

}  // namespace flash
