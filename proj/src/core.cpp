#include "flash/core.hpp"

#include <charconv>
#include <cstdio>

namespace flash {

namespace {

int parse_int(std::string_view text, std::string_view whole) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw InputError("invalid date '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                    std::chrono::day{day}};
    if (!ymd.ok()) {
        throw InputError("invalid calendar date");
    }
    days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        throw InputError("invalid date '" + std::string(iso) + "', expected YYYY-MM-DD");
    }
    const int y = parse_int(iso.substr(0, 4), iso);
    const int m = parse_int(iso.substr(5, 2), iso);
    const int d = parse_int(iso.substr(8, 2), iso);
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                    std::chrono::day{unsigned(d)}};
    if (!ymd.ok()) {
        throw InputError("invalid date '" + std::string(iso) + "'");
    }
    return Date(std::chrono::sys_days{ymd});
}

std::string Date::iso() const {
    const std::chrono::year_month_day ymd{days_};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

int weekday_of(const Date& date) {
    return int(std::chrono::weekday{date.sys_days()}.iso_encoding()) - 1;
}

std::string_view to_string(RegionLevel level) {
    switch (level) {
        case RegionLevel::county: return "county";
        case RegionLevel::state: return "state";
        case RegionLevel::territory: return "territory";
        case RegionLevel::nation: return "nation";
    }
    return "county";
}

RegionLevel parse_region_level(std::string_view text) {
    if (text == "county") return RegionLevel::county;
    if (text == "state") return RegionLevel::state;
    if (text == "territory") return RegionLevel::territory;
    if (text == "nation") return RegionLevel::nation;
    throw InputError("unknown region level '" + std::string(text) + "'");
}

std::string_view to_string(OutlierCategory category) {
    switch (category) {
        case OutlierCategory::out_of_range: return "out_of_range";
        case OutlierCategory::global: return "global";
        case OutlierCategory::day_of_week: return "day_of_week";
        case OutlierCategory::trendline: return "trendline";
    }
    return "trendline";
}

OutlierCategory parse_outlier_category(std::string_view text) {
    if (text == "out_of_range") return OutlierCategory::out_of_range;
    if (text == "global") return OutlierCategory::global;
    if (text == "day_of_week") return OutlierCategory::day_of_week;
    if (text == "trendline") return OutlierCategory::trendline;
    throw InputError("unknown outlier category '" + std::string(text) + "'");
}

void RegionRegistry::add(RegionId region, std::int64_t population) {
    if (population < 1) {
        throw InputError("region " + region.code + ": population must be >= 1");
    }
    if (entries_.count(region.code) != 0) {
        throw InputError("duplicate region code " + region.code);
    }
    switch (region.level) {
        case RegionLevel::nation:
            if (region.parent) {
                throw InputError("nation " + region.code + " cannot have a parent");
            }
            break;
        case RegionLevel::state:
        case RegionLevel::territory: {
            if (!region.parent || !contains(*region.parent) ||
                find(*region.parent).level != RegionLevel::nation) {
                throw InputError("state-level region " + region.code + " needs a nation parent");
            }
            break;
        }
        case RegionLevel::county: {
            if (!region.parent || !contains(*region.parent) ||
                !find(*region.parent).is_state_level()) {
                throw InputError("county " + region.code + " needs a state-level parent");
            }
            break;
        }
    }
    std::string code = region.code;
    entries_.emplace(std::move(code), Entry{std::move(region), population});
}

bool RegionRegistry::contains(std::string_view code) const {
    return entries_.find(code) != entries_.end();
}

const RegionRegistry::Entry& RegionRegistry::entry(std::string_view code) const {
    auto it = entries_.find(code);
    if (it == entries_.end()) {
        throw LookupError("unknown region '" + std::string(code) + "'");
    }
    return it->second;
}

const RegionId& RegionRegistry::find(std::string_view code) const { return entry(code).region; }

std::int64_t RegionRegistry::population(std::string_view code) const {
    return entry(code).population;
}

std::vector<std::string> RegionRegistry::sibling_group(std::string_view code) const {
    const RegionId& self = find(code);
    std::vector<std::string> out;
    if (self.level == RegionLevel::nation) {
        out.push_back(self.code);
        return out;
    }
    for (const auto& [key, e] : entries_) {
        const RegionId& r = e.region;
        const bool same_level = self.level == RegionLevel::county
                                    ? r.level == RegionLevel::county
                                    : r.is_state_level();
        if (same_level && r.parent == self.parent) {
            out.push_back(key);
        }
    }
    return out;
}

std::string RegionRegistry::group_key(std::string_view code) const {
    const RegionId& self = find(code);
    switch (self.level) {
        case RegionLevel::nation: return "nation:" + self.code;
        case RegionLevel::county: return "counties:" + *self.parent;
        default: return "states:" + *self.parent;
    }
}

std::vector<std::string> RegionRegistry::codes() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& kv : entries_) out.push_back(kv.first);
    return out;
}

void StreamSeries::validate() const {
    if (population < 1) {
        throw InputError("stream " + region.code + ": population must be >= 1");
    }
}

}  // namespace flash
