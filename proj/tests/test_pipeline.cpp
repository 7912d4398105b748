#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "flash/pipeline/evaluate.hpp"
#include "flash/pipeline/flag_store.hpp"
#include "flash/pipeline/state_dir.hpp"

#include <fstream>
#include <sstream>

using namespace flash;

namespace {

RegionRegistry tiny_registry() {
    std::istringstream in(
        "region_code,region_level,parent_code,population\n"
        "36081,county,NY,2300000\n"
        "NY,state,US,19000000\n"
        "US,nation,,330000000\n"
        "PR,territory,US,3200000\n");
    return parse_regions(in);
}

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

std::vector<Observation> parse(const std::string& text, const RegionRegistry& reg) {
    std::istringstream in(text);
    return parse_observations(in, reg, "data.csv");
}

PipelineConfig small_config() {
    PipelineConfig cfg;
    cfg.workers = 2;
    return cfg;
}

}  // namespace

TEST_CASE("config defaults and validation") {
    const PipelineConfig d = config_from_json(nlohmann::json::object());
    CHECK(d == PipelineConfig{});
    CHECK(d.z_threshold == 3.0);
    CHECK(d.min_spacing == 28);
    CHECK(d.ar_lag == 7);
    CHECK(d.ks_alpha == 0.01);
    CHECK(d.retrain_max_age_days == 90);
    CHECK_FALSE(d.pelt_penalty.has_value());

    CHECK(config_from_json({{"pelt_penalty", 12.5}}).pelt_penalty == 12.5);
    CHECK_FALSE(config_from_json({{"pelt_penalty", "bic"}}).pelt_penalty.has_value());
    CHECK(error_of([] { config_from_json({{"z_treshold", 3}}); }).find("unknown key 'z_treshold'") !=
          std::string::npos);
    CHECK_THROWS_AS(config_from_json({{"pelt_penalty", "aic"}}), InputError);
    CHECK_THROWS_AS(config_from_json({{"ks_alpha", 1.5}}), InputError);
    CHECK_THROWS_AS(config_from_json({{"min_spacing", 1}}), InputError);
    CHECK_THROWS_AS(config_from_json({{"short_series_cutoff", 20}}), InputError);
    CHECK_THROWS_AS(config_from_json({{"ar_lag", "seven"}}), InputError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), InputError);

    PipelineConfig c;
    c.pelt_penalty = 3.0;
    c.workers = 3;
    c.regions = "r.csv";
    CHECK(config_from_json(to_json(c)) == c);
}

TEST_CASE("config file resolves regions next to it") {
    const auto dir = fixture::scratch_dir("config");
    std::ofstream(dir / "c.json") << R"({"regions": "meta/regions.csv", "workers": 1})";
    const auto cfg = load_config(dir / "c.json");
    CHECK(cfg.regions == (dir / "meta/regions.csv").string());
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS_AS(load_config(dir / "bad.json"), InputError);
    CHECK_THROWS_AS(load_config(dir / "missing.json"), InputError);
}

TEST_CASE("region table") {
    const auto reg = tiny_registry();
    CHECK(reg.size() == 4);
    CHECK(reg.find("36081").parent == "NY");
    CHECK(reg.find("PR").level == RegionLevel::territory);
    std::ostringstream out;
    write_regions(out, reg);
    std::istringstream back(out.str());
    const auto again = parse_regions(back);
    for (const auto& code : reg.codes()) {
        CHECK(again.find(code) == reg.find(code));
        CHECK(again.population(code) == reg.population(code));
    }
    std::istringstream bad_header("code,level,parent,population\n");
    CHECK_THROWS_AS(parse_regions(bad_header), InputError);
    std::istringstream orphan("region_code,region_level,parent_code,population\n1,county,ZZ,5\n");
    CHECK_THROWS_AS(parse_regions(orphan), InputError);
    std::istringstream bad_pop("region_code,region_level,parent_code,population\nUS,nation,,-4\n");
    CHECK(error_of([&] { parse_regions(bad_pop, "regions.csv"); }).find("regions.csv:2") != std::string::npos);
}

TEST_CASE("data table") {
    const auto reg = tiny_registry();
    const std::string header = "date,region_code,region_level,value\n";
    const auto rows = parse(header +
                                "2021-01-01,NY,state,10\n"
                                "2021-01-02,NY,state,\n"
                                "2021-01-04,NY,state,NA\n"
                                "2021-01-05,NY,state,-3\n"
                                "2021-01-01,US,nation,100.5\n",
                            reg);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].line == 2);
    CHECK(is_missing(rows[1].value));
    CHECK(rows[3].value == -3);
    const auto series = build_series(rows, reg);
    REQUIRE(series.size() == 2);
    CHECK(series[0].region.code == "NY");
    CHECK(series[0].length() == 5);
    CHECK(is_missing(series[0].values[2]));  // the absent 01-03 row
    CHECK(series[0].population == 19000000);
    CHECK(series[1].values[0] == 100.5);

    std::ostringstream out;
    write_series(out, series);
    const auto back = build_series(parse(out.str(), reg), reg);
    CHECK(back[0].length() == 5);
    CHECK(back[0].values[0] == 10);
    CHECK(is_missing(back[0].values[1]));

    CHECK(error_of([&] { parse("date,region,level,value\n", reg); }).find("data.csv:1") != std::string::npos);
    CHECK(error_of([&] { parse(header + "2021-01-01,NY,state,10\n2021-01-01,NY,state,11\n", reg); })
              .find("data.csv:3") != std::string::npos);
    CHECK(error_of([&] { parse(header + "2021-01-01,NY,state,10\n2021-01-02,ZZ,state,1\n", reg); })
              .find("data.csv:3") != std::string::npos);
    CHECK(error_of([&] { parse(header + "2021-01-01,NY,county,10\n", reg); }).find("data.csv:2") !=
          std::string::npos);
    CHECK(error_of([&] { parse(header + "2021-13-01,NY,state,10\n", reg); }).find("data.csv:2") !=
          std::string::npos);
    CHECK(error_of([&] { parse(header + "2021-01-01,NY,state,ten\n", reg); }).find("data.csv:2") !=
          std::string::npos);
    CHECK(error_of([&] { parse(header + "2021-01-01,NY,state\n", reg); }).find("data.csv:2") !=
          std::string::npos);
}

TEST_CASE("train builds one group per sibling set") {
    const auto w = fixture::make_world(6, 1, 40, 60);
    const auto snap = train(small_config(), w.registry, w.history);
    // 5 county groups, the states group and the nation.
    CHECK(snap.groups.size() == 7);
    CHECK(snap.streams.size() == w.registry.size());
    CHECK(snap.groups.at("states:US").members.size() == 6);
    CHECK(snap.groups.at("nation:US").members == std::vector<std::string>{"US"});
    for (const auto& [key, g] : snap.groups) {
        REQUIRE(g.null.has_value());
        CHECK(g.null->stats.size() == 30 * g.members.size());
    }
    CHECK(snap.built_at == w.next_date - 1);
}

TEST_CASE("short streams are kept out of modeling") {
    auto w = fixture::make_world(3, 0, 6, 60);
    for (auto& s : w.history) {
        if (s.region.code == "C00001") {
            s.values = s.values.tail(45).eval();
            s.start = s.start + 15;
        }
    }
    const auto snap = train(small_config(), w.registry, w.history);
    const auto& st = snap.streams.at("C00001");
    CHECK(st.short_series);
    CHECK(st.holdout_k.empty());
    CHECK(st.labels.size() == 45);
    CHECK(snap.groups.at("counties:S01").null->stats.size() == 30);

    auto obs = w.next_day;
    obs["C00001"] = 1e6;
    auto copy = snap;
    const auto report = score_day(copy, w.next_date, obs, small_config());
    REQUIRE(report.short_series.size() == 1);
    CHECK(report.short_series[0].flagged);
    for (const auto& f : report.flags) CHECK(f.region != "C00001");
}

TEST_CASE("training is deterministic across runs and worker counts") {
    const auto w = fixture::make_world(5, 1, 30, 80, 3);
    PipelineConfig one = small_config(), four = small_config();
    one.workers = 1;
    four.workers = 4;
    const std::string a = serialize_snapshot(train(one, w.registry, w.history));
    CHECK(a == serialize_snapshot(train(one, w.registry, w.history)));
    CHECK(a == serialize_snapshot(train(four, w.registry, w.history)));
}

TEST_CASE("score_day") {
    auto w = fixture::make_world(5, 1, 300, 90, 4);
    const auto cfg = small_config();
    const auto trained = train(cfg, w.registry, w.history);

    SUBCASE("a value at the prediction scores low") {
        auto snap = trained;
        auto probe = trained;
        const auto base = score_day(probe, w.next_date, w.next_day, cfg);
        std::map<std::string, double> obs = w.next_day;
        for (const auto& f : base.flags) {
            // Report the weekday-corrected prediction back in raw units.
            const auto& st = trained.streams.at(f.region);
            obs[f.region] = std::round(f.predicted * st.regimes.back().weekday.factors[std::size_t(weekday_of(w.next_date))]);
        }
        const auto report = score_day(snap, w.next_date, obs, cfg);
        std::size_t low = 0;
        for (const auto& f : report.flags) low += f.rank_score < 0.5;
        CHECK(double(low) > 0.9 * double(report.flags.size()));
    }

    SUBCASE("a tenfold spike lands in the top 1%") {
        auto snap = trained;
        auto obs = w.next_day;
        obs["C00042"] *= 10;
        const auto report = score_day(snap, w.next_date, obs, cfg);
        std::size_t pos = 0;
        while (report.flags[pos].region != "C00042") ++pos;
        CHECK(pos < std::max<std::size_t>(1, report.flags.size() / 100));
    }

    SUBCASE("negative and missing values are annotated out_of_range") {
        auto snap = trained;
        auto obs = w.next_day;
        obs["C00007"] = -5;
        obs.erase("C00008");
        obs["NOWHERE"] = 4;
        const auto report = score_day(snap, w.next_date, obs, cfg);
        int found = 0;
        for (const auto& f : report.flags) {
            if (f.region == "C00007" || f.region == "C00008") {
                CHECK(f.category == OutlierCategory::out_of_range);
                ++found;
            }
            CHECK(f.rank_score == std::abs(2 * f.p_value - 1));
        }
        CHECK(found == 2);
        CHECK(snap.streams.at("C00008").imputed[90] == snap.streams.at("C00008").imputed[89]);
        REQUIRE(report.warnings.size() == 1);
        CHECK(report.warnings[0].find("NOWHERE") != std::string::npos);
        CHECK(report.flags.size() == w.registry.size());
    }

    SUBCASE("scoring advances history and the monitors") {
        auto snap = trained;
        const auto report = score_day(snap, w.next_date, w.next_day, cfg);
        CHECK(snap.streams.at("US").last_date() == w.next_date);
        CHECK(snap.groups.at("states:US").monitor.pvalues_since_retrain.size() == 5);
        CHECK(report.decisions.size() == snap.groups.size());
        CHECK_THROWS_AS(score_day(snap, w.next_date, w.next_day, cfg), InputError);
        // Skipping ahead pads the gap with missing days.
        const auto later = score_day(snap, w.next_date + 3, w.next_day, cfg);
        CHECK(snap.streams.at("US").raw.size() == 94);
        CHECK(is_missing(snap.streams.at("US").raw[91]));
        CHECK(later.flags.size() == w.registry.size());
    }

    SUBCASE("snapshot round-trip scores identically") {
        auto in_memory = trained;
        auto loaded = parse_snapshot(serialize_snapshot(trained));
        CHECK(loaded == trained);
        const auto a = score_day(in_memory, w.next_date, w.next_day, cfg);
        const auto b = score_day(loaded, w.next_date, w.next_day, cfg);
        CHECK(to_json(a).dump() == to_json(b).dump());
        CHECK(serialize_snapshot(in_memory) == serialize_snapshot(loaded));
    }
}

TEST_CASE("snapshot files") {
    const auto w = fixture::make_world(3, 0, 6, 60);
    const auto snap = train(small_config(), w.registry, w.history);
    const auto dir = fixture::scratch_dir("snapshot");
    save_snapshot(dir / "s.json", snap);
    CHECK(load_snapshot(dir / "s.json") == snap);
    auto j = to_json(snap);
    j["version"] = 99;
    CHECK_THROWS_AS(snapshot_from_json(j), InputError);
    CHECK_THROWS_AS(parse_snapshot("{}"), InputError);
    CHECK_THROWS_AS(load_snapshot(dir / "none.json"), InputError);
}

TEST_CASE("flag store replays appends and reviews") {
    const auto dir = fixture::scratch_dir("flags");
    const auto path = dir / "flags.jsonl";
    auto flag = [](std::string region, std::string date, double score) {
        FlagRecord f;
        f.region = std::move(region);
        f.date = Date::parse(date);
        f.rank_score = score;
        f.p_value = (1 + score) / 2;
        return f;
    };
    {
        FlagStore store(path);
        store.append_flags({flag("A", "2021-03-01", 0.1), flag("B", "2021-03-01", 0.9)});
        store.append_flags({flag("A", "2021-03-02", 0.5)});
        const auto r = store.review("B", Date::parse("2021-03-01"), true, "checked", "t1");
        CHECK(r.reviewed);
        CHECK_THROWS_AS(store.review("Z", Date::parse("2021-03-01"), true, std::nullopt, "t2"), LookupError);
        store.review("B", Date::parse("2021-03-01"), false, "second look", "t3");
    }
    FlagStore store(path);
    const auto day = store.on(Date::parse("2021-03-01"));
    REQUIRE(day.size() == 2);
    CHECK(day[0].region == "B");
    CHECK_FALSE(day[0].reviewed);
    CHECK(day[0].reviewer_note == "second look");
    CHECK(store.window(Date::parse("2021-03-02"), 2).size() == 3);
    CHECK(store.window(Date::parse("2021-03-02"), 2)[0].region == "B");
    CHECK(store.on(Date::parse("2021-03-03")).empty());
    CHECK(store.dates().size() == 2);

    // A rescored flag keeps its review.
    store.review("A", Date::parse("2021-03-02"), true, std::nullopt, "t4");
    store.append_flags({flag("A", "2021-03-02", 0.7)});
    FlagStore again(path);
    const auto a = again.find("A", Date::parse("2021-03-02"));
    REQUIRE(a.has_value());
    CHECK(a->rank_score == 0.7);
    CHECK(a->reviewed);
}

TEST_CASE("state directory lifecycle") {
    const auto w = fixture::make_world(4, 1, 20, 70, 5);
    const auto in = fixture::scratch_dir("state_in");
    {
        std::ofstream r(in / "regions.csv");
        write_regions(r, w.registry);
        std::ofstream d(in / "data.csv");
        write_series(d, w.history);
        std::ofstream(in / "config.json") << R"({"regions": "regions.csv", "workers": 2})";
        std::ofstream o(in / "obs.csv");
        o << kDataHeader << "\n";
        for (const auto& [code, v] : w.next_day) {
            o << w.next_date.iso() << "," << code << "," << to_string(w.registry.find(code).level) << "," << v << "\n";
        }
        std::ofstream bad(in / "bad_obs.csv");
        bad << kDataHeader << "\n" << (w.next_date + 1).iso() << ",US,nation,5\n";
    }
    const StateDir dir{fixture::scratch_dir("state")};
    const auto snap = train_into(dir, load_config(in / "config.json"), in / "data.csv");
    CHECK(std::filesystem::exists(dir.snapshot()));
    CHECK(load_snapshot(dir.snapshot()) == snap);
    CHECK(load_state_config(dir).workers == 2);

    CHECK_THROWS_AS(score_into(dir, w.next_date, in / "bad_obs.csv"), InputError);
    const auto report = score_into(dir, w.next_date, in / "obs.csv");
    CHECK(report.flags.size() == w.registry.size());
    CHECK(std::filesystem::exists(dir.reports() / ("score_" + w.next_date.iso() + ".json")));
    CHECK(FlagStore(dir.flags()).on(w.next_date).size() == w.registry.size());
    CHECK(load_snapshot(dir.snapshot()).streams.at("US").last_date() == w.next_date);

    const auto re = retrain(dir);
    CHECK(re.built_at == w.next_date);
    CHECK(re.streams.at("US").raw.size() == 71);
    for (const auto& [key, g] : re.groups) CHECK(g.monitor.pvalues_since_retrain.empty());
}

TEST_CASE("labels table") {
    std::istringstream ok(
        "region_code,date,rater_id,warrants,rank,assistive_likelihood\n"
        "US,2021-03-01,r1,1,1,unlikely\n"
        "US,2021-03-01,r2,0,,\n"
        "NY,2021-03-01,r1,true,2,likely\n");
    const auto rows = parse_labels(ok, "labels.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].likelihood == eval::Likelihood::unlikely);
    CHECK_FALSE(rows[1].rank.has_value());
    CHECK(rows[2].warrants);
    auto bad = [](const std::string& body) {
        std::istringstream in("region_code,date,rater_id,warrants,rank,assistive_likelihood\n" + body);
        return error_of([&] { parse_labels(in, "labels.csv"); });
    };
    CHECK(bad("US,2021-03-01,r1,yes,1,\n").find("labels.csv:2") != std::string::npos);
    CHECK(bad("US,2021-03-01,r1,1,0,\n").find("labels.csv:2") != std::string::npos);
    CHECK(bad("US,2021-03-01,r1,1,1,maybe\n").find("labels.csv:2") != std::string::npos);
    CHECK(bad("US,2021-03-01,r1,1,1,\nUS,2021-03-01,r1,0,,\n").find("labels.csv:3") != std::string::npos);
    std::istringstream header("region,date,rater,warrants,rank,likelihood\n");
    CHECK_THROWS_AS(parse_labels(header), InputError);
}

TEST_CASE("evaluate scores flags against labels") {
    std::vector<FlagRecord> flags;
    const std::vector<double> scores{0.99, 0.9, 0.5, 0.2};
    for (std::size_t i = 0; i < scores.size(); ++i) {
        FlagRecord f;
        f.region = "US";
        f.date = Date::parse("2021-03-01") + std::int64_t(i);
        f.rank_score = scores[i];
        flags.push_back(f);
    }
    auto row = [](int day, const std::string& rater, bool warrants, std::optional<int> rank,
                  std::optional<eval::Likelihood> l) {
        return eval::LabelRow{{"US", Date::parse("2021-03-01") + day}, rater, warrants, rank, l};
    };
    using L = eval::Likelihood;
    const std::vector<eval::LabelRow> labels{
        row(0, "a", true, 1, L::likely),  row(0, "b", true, 2, L::unlikely), row(0, "c", true, 1, L::unlikely),
        row(2, "a", true, 2, L::likely),  row(2, "b", true, 1, L::likely),   row(2, "c", false, std::nullopt, std::nullopt),
        row(1, "a", false, {}, {}),       row(1, "b", false, {}, {}),        row(3, "a", false, {}, {})};
    const auto report = evaluate(flags, labels);
    const auto& us = report.at("regions").at("US");
    CHECK(us.at("candidates") == 4);
    CHECK(us.at("warranting") == 2);
    // Top 2 by score are days 0 and 1; day 2 is missed.
    CHECK(us.at("accuracy").get<double>() == doctest::Approx(0.5));
    CHECK(us.at("f1").get<double>() == doctest::Approx(0.5));
    CHECK(us.at("roc_auc").get<double>() == doctest::Approx(0.75));
    CHECK(us.at("assistive_rank").get<double>() == doctest::Approx(1.0));
    CHECK(us.at("raters").at("a").at("hamming") == 0.0);
    CHECK(us.at("raters").at("b").at("hamming") == 1.0);
    CHECK_FALSE(us.at("raters").contains("c"));
    CHECK(us.at("copeland").size() == 2);
    CHECK(report.at("summary").at("accuracy").get<double>() == doctest::Approx(0.5));

    std::vector<eval::LabelRow> unknown = labels;
    unknown.push_back(row(9, "a", true, 1, std::nullopt));
    CHECK_THROWS_AS(evaluate(flags, unknown), LookupError);
}
