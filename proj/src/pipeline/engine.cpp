#include "flash/pipeline/engine.hpp"

#include "flash/pipeline/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace flash {

using nlohmann::json;

namespace {

StreamSeries analyzable_part(const StreamSeries& s) {
    if (s.start_index <= 0) return s;
    if (s.start_index >= s.length()) {
        throw InputError("stream " + s.region.code + ": start_index beyond series end");
    }
    StreamSeries out = s;
    out.start = s.start + s.start_index;
    out.values = s.values.tail(s.length() - s.start_index);
    out.start_index = 0;
    return out;
}

StreamState train_stream(const StreamSeries& series, const RegimeSegmentation& segmentation,
                         const PipelineConfig& cfg) {
    StreamState st;
    st.region = series.region;
    st.population = series.population;
    st.start = series.start;
    st.raw = series.values;

    const ProcessedSeries processed = process_stream(series, segmentation, {{cfg.z_threshold}});
    st.imputed = processed.imputed_values;
    st.corrected = processed.weekday_corrected;
    st.labels = processed.labels;
    st.segmentation = processed.segmentation;
    st.regimes = processed.regimes;

    st.split = training_split(series.length(), cfg.ar_lag);
    st.model = fit_ar(st.corrected.head(st.split.train_end), cfg.ridge, cfg.ar_lag);
    const double ceiling = double(series.population);
    for (Eigen::Index t = st.split.train_end; t < st.split.holdout_end; ++t) {
        const double pred = std::clamp(predict(st.model, st.corrected, t), 0.0, ceiling);
        st.holdout_predicted.push_back(pred);
        st.holdout_k.push_back(binom_stat(st.corrected[t], pred, series.population));
    }
    return st;
}

void append(Vector& v, double x) {
    v.conservativeResize(v.size() + 1);
    v[v.size() - 1] = x;
}

struct ScoredPoint {
    std::optional<FlagRecord> flag;
    std::optional<ShortSeriesNote> note;
    std::optional<std::string> warning;
};

// Appends one day to a modeled stream and returns its record (without p-value).
FlagRecord advance_modeled(StreamState& st, Date date, double raw, double z_threshold) {
    const double ceiling = double(st.population);
    const RegimeProfile& regime = st.regimes.back();
    const int wd = weekday_of(date);

    FlagRecord rec;
    rec.region = st.region.code;
    rec.date = date;
    rec.observed = raw;

    double imputed = raw;
    if (is_missing(raw)) {
        imputed = st.imputed.size() > 0 ? st.imputed[st.imputed.size() - 1] : 0.0;
    } else {
        imputed = std::clamp(raw, 0.0, ceiling);
    }
    if (imputed != raw) rec.category = OutlierCategory::out_of_range;
    rec.imputed = imputed;
    rec.corrected = std::max(0.0, regime.weekday.correct(imputed, wd));

    const double sd_dow = regime.dow_sd[std::size_t(wd)];
    rec.dow_z = sd_dow > 0.0 ? (imputed - regime.dow_mean[std::size_t(wd)]) / sd_dow : 0.0;
    rec.global_z =
        regime.corrected_sd > 0.0 ? (rec.corrected - regime.corrected_mean) / regime.corrected_sd : 0.0;
    const double floor_z = z_threshold * (1.0 - 1e-12);
    if (!rec.category) {
        if (std::abs(rec.dow_z) >= floor_z) rec.category = OutlierCategory::day_of_week;
        else if (std::abs(rec.global_z) >= floor_z) rec.category = OutlierCategory::global;
    }

    const int lag = st.model.lag();
    rec.predicted = std::clamp(predict_next(st.model, st.corrected.tail(lag)), 0.0, ceiling);
    rec.k = binom_stat(rec.corrected, rec.predicted, st.population);
    rec.residual_per_capita = std::abs(rec.corrected - rec.predicted) / ceiling;

    append(st.raw, raw);
    append(st.imputed, imputed);
    append(st.corrected, rec.corrected);
    st.labels.push_back(rec.category);
    return rec;
}

ScoredPoint score_stream(StreamState& st, const GroupState* group, Date date,
                         const std::map<std::string, double>& observations, const PipelineConfig& cfg) {
    const double z_threshold = cfg.z_threshold;
    if (!(date > st.last_date())) {
        throw InputError("stream " + st.region.code + ": date " + date.iso() +
                         " does not follow last scored date " + st.last_date().iso());
    }
    ScoredPoint out;
    auto it = observations.find(st.region.code);
    const double raw = it == observations.end() ? kMissing : it->second;

    if (st.short_series) {
        while (st.last_date() + 1 < date) append(st.raw, kMissing);
        append(st.raw, raw);
        StreamSeries view{st.region, st.population, st.start, st.raw, 0};
        const Labels labels = short_series_outliers(view, cfg.iqr_multiplier);
        out.note = ShortSeriesNote{st.region.code, date, raw, labels.back().has_value()};
        return out;
    }

    for (Date gap = st.last_date() + 1; gap < date; gap = gap + 1) {
        advance_modeled(st, gap, kMissing, z_threshold);
    }
    FlagRecord rec = advance_modeled(st, date, raw, z_threshold);
    if (!group || !group->null) {
        out.warning = "stream " + st.region.code + ": group " + st.group + " has no pooled null";
        return out;
    }
    rec.p_value = empirical_p(rec.k, *group->null);
    rec.rank_score = rank_score(rec.p_value);
    out.flag = std::move(rec);
    return out;
}

json num_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

}  // namespace

StateSnapshot train(const PipelineConfig& cfg, const RegionRegistry& registry,
                    const std::vector<StreamSeries>& data) {
    cfg.validate();
    std::vector<StreamSeries> series;
    series.reserve(data.size());
    for (const auto& s : data) {
        s.validate();
        if (s.length() == 0) throw InputError("stream " + s.region.code + " is empty");
        series.push_back(analyzable_part(s));
    }
    std::sort(series.begin(), series.end(),
              [](const StreamSeries& a, const StreamSeries& b) { return a.region.code < b.region.code; });
    for (std::size_t i = 1; i < series.size(); ++i) {
        if (series[i].region.code == series[i - 1].region.code) {
            throw InputError("duplicate stream for region " + series[i].region.code);
        }
    }

    StateSnapshot snap;
    for (const auto& s : series) snap.built_at = std::max(snap.built_at, s.end());

    std::vector<std::string> keys(series.size());
    std::vector<bool> is_short(series.size());
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < series.size(); ++i) {
        keys[i] = registry.group_key(series[i].region.code);
        is_short[i] = series[i].length() < cfg.short_series_cutoff;
        members[keys[i]].push_back(i);
    }
    std::vector<const std::vector<std::size_t>*> group_list;
    for (const auto& kv : members) group_list.push_back(&kv.second);

    const unsigned workers = cfg.worker_count();
    std::vector<RegimeSegmentation> segmentations(series.size());
    parallel_for(group_list.size(), workers, [&](std::size_t g) {
        std::vector<std::size_t> modeled;
        std::vector<DatedValues> dated;
        for (std::size_t i : *group_list[g]) {
            if (is_short[i]) continue;
            modeled.push_back(i);
            dated.push_back({series[i].start, clamp_out_of_range(series[i]).values});
        }
        try {
            const auto segs = segment_ragged(dated, cfg.pelt_penalty, cfg.min_spacing);
            for (std::size_t j = 0; j < modeled.size(); ++j) segmentations[modeled[j]] = segs[j];
        } catch (const Error& e) {
            throw ModelError("group " + keys[group_list[g]->front()] + ": " + e.what());
        }
    });

    std::vector<StreamState> states(series.size());
    parallel_for(series.size(), workers, [&](std::size_t i) {
        const StreamSeries& s = series[i];
        if (is_short[i]) {
            StreamState& st = states[i];
            st.region = s.region;
            st.population = s.population;
            st.start = s.start;
            st.raw = s.values;
            st.short_series = true;
            st.labels = short_series_outliers(s, cfg.iqr_multiplier);
            for (Eigen::Index t = 0; t < s.length(); ++t) {
                if (is_missing(s.values[t])) st.labels[std::size_t(t)] = OutlierCategory::out_of_range;
            }
        } else {
            try {
                states[i] = train_stream(s, segmentations[i], cfg);
            } catch (const Error& e) {
                throw ModelError("stream " + s.region.code + ": " + e.what());
            }
        }
        states[i].group = keys[i];
    });

    for (const auto& [key, idx] : members) {
        GroupState g;
        g.key = key;
        std::map<std::string, std::vector<double>> holdout;
        for (std::size_t i : idx) {
            g.members.push_back(series[i].region.code);
            if (!is_short[i]) holdout[series[i].region.code] = states[i].holdout_k;
        }
        if (!holdout.empty()) g.null = build_pooled_null(holdout, g.members, snap.built_at);
        g.monitor.alpha = cfg.ks_alpha;
        g.monitor.max_age_days = cfg.retrain_max_age_days;
        g.monitor.last_retrain = snap.built_at;
        snap.groups.emplace(key, std::move(g));
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        snap.streams.emplace(series[i].region.code, std::move(states[i]));
    }
    return snap;
}

bool DayReport::retrain_suggested() const {
    return std::any_of(decisions.begin(), decisions.end(),
                       [](const GroupDecision& d) { return d.decision != RetrainDecision::none; });
}

DayReport score_day(StateSnapshot& snapshot, Date date,
                    const std::map<std::string, double>& observations, const PipelineConfig& cfg) {
    DayReport report;
    report.date = date;
    for (const auto& [code, value] : observations) {
        if (!snapshot.streams.count(code)) {
            report.warnings.push_back("observation for unknown region " + code + " skipped");
        }
    }

    std::vector<StreamState*> streams;
    for (auto& kv : snapshot.streams) streams.push_back(&kv.second);
    std::vector<ScoredPoint> scored(streams.size());
    parallel_for(streams.size(), cfg.worker_count(), [&](std::size_t i) {
        auto g = snapshot.groups.find(streams[i]->group);
        const GroupState* group = g == snapshot.groups.end() ? nullptr : &g->second;
        scored[i] = score_stream(*streams[i], group, date, observations, cfg);
    });

    std::vector<FlagRecord> flags;
    std::map<std::string, std::vector<double>> pvalues;
    for (std::size_t i = 0; i < streams.size(); ++i) {
        if (scored[i].warning) report.warnings.push_back(*scored[i].warning);
        if (scored[i].note) report.short_series.push_back(*scored[i].note);
        if (scored[i].flag) {
            pvalues[streams[i]->group].push_back(scored[i].flag->p_value);
            flags.push_back(std::move(*scored[i].flag));
        }
    }
    report.flags = rank_flags(std::move(flags));

    for (auto& [key, group] : snapshot.groups) {
        auto it = pvalues.find(key);
        if (it != pvalues.end()) {
            for (double p : it->second) group.monitor.record(p);
        }
        if (!group.null) continue;
        GroupDecision d;
        d.group = key;
        d.decision = should_retrain(group.monitor, date);
        d.pvalues = group.monitor.pvalues_since_retrain.size();
        if (d.pvalues > 0) d.ks = ks_statistic(group.monitor.pvalues_since_retrain);
        report.decisions.push_back(d);
    }
    return report;
}

json to_json(const FlagRecord& f) {
    return {{"region", f.region},
            {"date", f.date.iso()},
            {"p_value", f.p_value},
            {"rank_score", f.rank_score},
            {"category", f.category ? json(std::string(to_string(*f.category))) : json(nullptr)},
            {"observed", num_or_null(f.observed)},
            {"imputed", f.imputed},
            {"corrected", f.corrected},
            {"predicted", f.predicted},
            {"k", f.k},
            {"dow_z", f.dow_z},
            {"global_z", f.global_z},
            {"residual_per_capita", f.residual_per_capita},
            {"reviewed", f.reviewed},
            {"reviewer_note", f.reviewer_note ? json(*f.reviewer_note) : json(nullptr)}};
}

FlagRecord flag_from_json(const json& j) {
    FlagRecord f;
    try {
        f.region = j.at("region").get<std::string>();
        f.date = Date::parse(j.at("date").get<std::string>());
        f.p_value = j.at("p_value").get<double>();
        f.rank_score = j.at("rank_score").get<double>();
        if (!j.at("category").is_null()) f.category = parse_outlier_category(j.at("category").get<std::string>());
        f.observed = j.at("observed").is_null() ? kMissing : j.at("observed").get<double>();
        f.imputed = j.at("imputed").get<double>();
        f.corrected = j.at("corrected").get<double>();
        f.predicted = j.at("predicted").get<double>();
        f.k = j.at("k").get<double>();
        f.dow_z = j.at("dow_z").get<double>();
        f.global_z = j.at("global_z").get<double>();
        f.residual_per_capita = j.at("residual_per_capita").get<double>();
        f.reviewed = j.value("reviewed", false);
        if (j.contains("reviewer_note") && !j.at("reviewer_note").is_null()) {
            f.reviewer_note = j.at("reviewer_note").get<std::string>();
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("flag record: ") + e.what());
    }
    return f;
}

json to_json(const DayReport& report) {
    json j;
    j["date"] = report.date.iso();
    json flags = json::array();
    for (const auto& f : report.flags) flags.push_back(to_json(f));
    j["flags"] = std::move(flags);
    json notes = json::array();
    for (const auto& n : report.short_series) {
        notes.push_back({{"region", n.region}, {"date", n.date.iso()}, {"value", num_or_null(n.value)},
                         {"flagged", n.flagged}});
    }
    j["short_series"] = std::move(notes);
    json decisions = json::array();
    for (const auto& d : report.decisions) {
        decisions.push_back({{"group", d.group},
                             {"decision", std::string(to_string(d.decision))},
                             {"pvalues", d.pvalues},
                             {"ks", d.ks}});
    }
    j["decisions"] = std::move(decisions);
    j["retrain_suggested"] = report.retrain_suggested();
    j["warnings"] = report.warnings;
    return j;
}

}  // namespace flash
