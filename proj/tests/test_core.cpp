#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flash/core.hpp"

#include <random>
#include <set>

using namespace flash;

namespace {

RegionRegistry small_registry() {
    RegionRegistry r;
    r.add({"US", RegionLevel::nation, std::nullopt}, 330'000'000);
    r.add({"NY", RegionLevel::state, "US"}, 19'000'000);
    r.add({"PA", RegionLevel::state, "US"}, 13'000'000);
    r.add({"PR", RegionLevel::territory, "US"}, 3'200'000);
    r.add({"36081", RegionLevel::county, "NY"}, 2'300'000);
    r.add({"36047", RegionLevel::county, "NY"}, 2'600'000);
    r.add({"42101", RegionLevel::county, "PA"}, 1'600'000);
    return r;
}

}  // namespace

TEST_CASE("weekday_of uses Monday = 0") {
    CHECK(weekday_of(Date::parse("2022-02-07")) == 0);
    CHECK(weekday_of(Date::parse("2022-02-13")) == 6);
    CHECK(weekday_of(Date::parse("2020-02-29")) == 5);
}

TEST_CASE("dates parse, print and do arithmetic") {
    CHECK(Date::parse("2020-03-01").iso() == "2020-03-01");
    CHECK(Date::parse("2020-02-28") + 1 == Date::parse("2020-02-29"));
    CHECK(Date::parse("2021-01-01") - Date::parse("2020-01-01") == 366);
    CHECK(Date(2021, 12, 31).iso() == "2021-12-31");
    for (const char* bad : {"2020-02-30", "2020-13-01", "20-01-01", "2020/01/01", "2020-01-01x", ""}) {
        CHECK_THROWS_AS(Date::parse(bad), InputError);
    }
}

TEST_CASE("date arithmetic round-trips") {
    const Date base = Date::parse("1999-12-31");
    for (std::int64_t n = 0; n <= 10000; n += 7) {
        CHECK((base + n) - n == base);
        CHECK((base + n) - base == n);
    }
}

TEST_CASE("sibling groups") {
    const RegionRegistry reg = small_registry();
    CHECK(reg.sibling_group("36081") == std::vector<std::string>{"36047", "36081"});
    CHECK(reg.sibling_group("PA") == std::vector<std::string>{"NY", "PA", "PR"});
    CHECK(reg.sibling_group("PR") == std::vector<std::string>{"NY", "PA", "PR"});
    CHECK(reg.sibling_group("US") == std::vector<std::string>{"US"});
    CHECK_THROWS_AS(reg.sibling_group("99999"), LookupError);
    CHECK(reg.group_key("36081") == "counties:NY");
    CHECK(reg.group_key("PR") == "states:US");
    CHECK(reg.group_key("US") == "nation:US");
}

TEST_CASE("sibling groups partition every level") {
    const RegionRegistry reg = small_registry();
    std::map<std::string, int> seen;
    std::set<std::vector<std::string>> groups;
    for (const auto& code : reg.codes()) {
        const auto g = reg.sibling_group(code);
        CHECK(std::find(g.begin(), g.end(), code) != g.end());
        groups.insert(g);
    }
    for (const auto& g : groups) {
        for (const auto& c : g) ++seen[c];
    }
    for (const auto& [code, n] : seen) CHECK_MESSAGE(n == 1, code);
    CHECK(seen.size() == reg.size());
}

TEST_CASE("registry rejects malformed hierarchies") {
    RegionRegistry r;
    CHECK_THROWS_AS(r.add({"NY", RegionLevel::state, "US"}, 10), InputError);
    r.add({"US", RegionLevel::nation, std::nullopt}, 100);
    CHECK_THROWS_AS(r.add({"US", RegionLevel::nation, std::nullopt}, 100), InputError);
    CHECK_THROWS_AS(r.add({"X1", RegionLevel::county, "US"}, 10), InputError);
    CHECK_THROWS_AS(r.add({"NY", RegionLevel::state, std::nullopt}, 10), InputError);
    CHECK_THROWS_AS(r.add({"NY", RegionLevel::state, "US"}, 0), InputError);
    r.add({"NY", RegionLevel::state, "US"}, 10);
    CHECK_THROWS_AS(r.add({"X2", RegionLevel::state, "NY"}, 10), InputError);
    CHECK(r.population("NY") == 10);
    CHECK_THROWS_AS(r.population("ZZ"), LookupError);
}

TEST_CASE("level and category names round-trip") {
    for (auto l : {RegionLevel::county, RegionLevel::state, RegionLevel::territory, RegionLevel::nation}) {
        CHECK(parse_region_level(to_string(l)) == l);
    }
    for (auto c : {OutlierCategory::out_of_range, OutlierCategory::global, OutlierCategory::day_of_week,
                   OutlierCategory::trendline}) {
        CHECK(parse_outlier_category(to_string(c)) == c);
    }
    CHECK_THROWS_AS(parse_region_level("city"), InputError);
}

TEST_CASE("stream series") {
    StreamSeries s{{"US", RegionLevel::nation, std::nullopt}, 1000, Date::parse("2021-01-01"),
                   Vector::Constant(10, 3.0), 0};
    CHECK(s.end() == Date::parse("2021-01-10"));
    CHECK(s.date_at(3) == Date::parse("2021-01-04"));
    s.population = 0;
    CHECK_THROWS_AS(s.validate(), InputError);
}
