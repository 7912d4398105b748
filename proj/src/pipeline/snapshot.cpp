#include "flash/pipeline/snapshot.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace flash {

using nlohmann::json;

namespace {

bool same_bits(const Vector& a, const Vector& b) {
    return a.size() == b.size() &&
           (a.size() == 0 || std::memcmp(a.data(), b.data(), std::size_t(a.size()) * sizeof(double)) == 0);
}

json vec_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(is_missing(v[i]) ? json(nullptr) : json(v[i]));
    }
    return out;
}

Vector vec_from(const json& j) {
    Vector v(Eigen::Index(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[Eigen::Index(i)] = j[i].is_null() ? kMissing : j[i].get<double>();
    }
    return v;
}

template <std::size_t N>
std::array<double, N> array_from(const json& j) {
    if (j.size() != N) throw InputError("snapshot: array of wrong length");
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = j[i].get<double>();
    return out;
}

json labels_json(const Labels& labels) {
    json out = json::array();
    for (const auto& l : labels) out.push_back(l ? json(std::string(to_string(*l))) : json(nullptr));
    return out;
}

Labels labels_from(const json& j) {
    Labels out;
    for (const auto& e : j) {
        out.push_back(e.is_null() ? std::nullopt
                                  : std::optional<OutlierCategory>(parse_outlier_category(e.get<std::string>())));
    }
    return out;
}

json region_json(const RegionId& r) {
    return {{"code", r.code},
            {"level", std::string(to_string(r.level))},
            {"parent", r.parent ? json(*r.parent) : json(nullptr)}};
}

RegionId region_from(const json& j) {
    RegionId r;
    r.code = j.at("code").get<std::string>();
    r.level = parse_region_level(j.at("level").get<std::string>());
    if (!j.at("parent").is_null()) r.parent = j.at("parent").get<std::string>();
    return r;
}

json profile_json(const RegimeProfile& p) {
    return {{"begin", p.begin},
            {"end", p.end},
            {"weekday_factors", p.weekday.factors},
            {"dow_mean", p.dow_mean},
            {"dow_sd", p.dow_sd},
            {"corrected_mean", p.corrected_mean},
            {"corrected_sd", p.corrected_sd}};
}

RegimeProfile profile_from(const json& j) {
    RegimeProfile p;
    p.begin = j.at("begin").get<Eigen::Index>();
    p.end = j.at("end").get<Eigen::Index>();
    p.weekday.factors = array_from<7>(j.at("weekday_factors"));
    p.dow_mean = array_from<7>(j.at("dow_mean"));
    p.dow_sd = array_from<7>(j.at("dow_sd"));
    p.corrected_mean = j.at("corrected_mean").get<double>();
    p.corrected_sd = j.at("corrected_sd").get<double>();
    return p;
}

json stream_json(const StreamState& s) {
    json j;
    j["region"] = region_json(s.region);
    j["population"] = s.population;
    j["group"] = s.group;
    j["short_series"] = s.short_series;
    j["start"] = s.start.iso();
    j["raw"] = vec_json(s.raw);
    j["imputed"] = vec_json(s.imputed);
    j["corrected"] = vec_json(s.corrected);
    j["labels"] = labels_json(s.labels);
    j["segmentation"] = {{"changepoints", s.segmentation.changepoints},
                         {"min_spacing", s.segmentation.min_spacing},
                         {"penalty", s.segmentation.penalty}};
    json regimes = json::array();
    for (const auto& r : s.regimes) regimes.push_back(profile_json(r));
    j["regimes"] = std::move(regimes);
    j["ar"] = {{"weights", vec_json(s.model.weights)},
               {"ridge", s.model.ridge},
               {"train_end", s.model.train_end}};
    j["split"] = {{"train_begin", s.split.train_begin},
                  {"train_end", s.split.train_end},
                  {"holdout_end", s.split.holdout_end}};
    j["holdout_predicted"] = s.holdout_predicted;
    j["holdout_k"] = s.holdout_k;
    return j;
}

StreamState stream_from(const json& j) {
    StreamState s;
    s.region = region_from(j.at("region"));
    s.population = j.at("population").get<std::int64_t>();
    s.group = j.at("group").get<std::string>();
    s.short_series = j.at("short_series").get<bool>();
    s.start = Date::parse(j.at("start").get<std::string>());
    s.raw = vec_from(j.at("raw"));
    s.imputed = vec_from(j.at("imputed"));
    s.corrected = vec_from(j.at("corrected"));
    s.labels = labels_from(j.at("labels"));
    const json& seg = j.at("segmentation");
    s.segmentation.changepoints = seg.at("changepoints").get<std::vector<Eigen::Index>>();
    s.segmentation.min_spacing = seg.at("min_spacing").get<int>();
    s.segmentation.penalty = seg.at("penalty").get<double>();
    for (const auto& r : j.at("regimes")) s.regimes.push_back(profile_from(r));
    const json& ar = j.at("ar");
    s.model.weights = vec_from(ar.at("weights"));
    s.model.ridge = ar.at("ridge").get<double>();
    s.model.train_end = ar.at("train_end").get<Eigen::Index>();
    const json& split = j.at("split");
    s.split.train_begin = split.at("train_begin").get<Eigen::Index>();
    s.split.train_end = split.at("train_end").get<Eigen::Index>();
    s.split.holdout_end = split.at("holdout_end").get<Eigen::Index>();
    s.holdout_predicted = j.at("holdout_predicted").get<std::vector<double>>();
    s.holdout_k = j.at("holdout_k").get<std::vector<double>>();
    return s;
}

json monitor_json(const MonitorState& m) {
    return {{"pvalues_since_retrain", m.pvalues_since_retrain},
            {"last_retrain", m.last_retrain.iso()},
            {"alpha", m.alpha},
            {"max_age_days", m.max_age_days}};
}

MonitorState monitor_from(const json& j) {
    MonitorState m;
    m.pvalues_since_retrain = j.at("pvalues_since_retrain").get<std::vector<double>>();
    m.last_retrain = Date::parse(j.at("last_retrain").get<std::string>());
    m.alpha = j.at("alpha").get<double>();
    m.max_age_days = j.at("max_age_days").get<std::int64_t>();
    return m;
}

}  // namespace

bool StreamState::operator==(const StreamState& o) const {
    return region == o.region && population == o.population && group == o.group &&
           short_series == o.short_series && start == o.start && same_bits(raw, o.raw) &&
           same_bits(imputed, o.imputed) && same_bits(corrected, o.corrected) && labels == o.labels &&
           segmentation == o.segmentation && regimes == o.regimes &&
           same_bits(model.weights, o.model.weights) && model.ridge == o.model.ridge &&
           model.train_end == o.model.train_end && split == o.split &&
           holdout_predicted == o.holdout_predicted && holdout_k == o.holdout_k;
}

json to_json(const StateSnapshot& snapshot) {
    json j;
    j["version"] = snapshot.version;
    j["built_at"] = snapshot.built_at.iso();
    json streams = json::object();
    for (const auto& [code, s] : snapshot.streams) streams[code] = stream_json(s);
    j["streams"] = std::move(streams);
    json groups = json::object();
    for (const auto& [key, g] : snapshot.groups) {
        json gj;
        gj["members"] = g.members;
        gj["monitor"] = monitor_json(g.monitor);
        if (g.null) {
            gj["null"] = {{"group", g.null->group},
                          {"stats", g.null->stats},
                          {"built_at", g.null->built_at.iso()}};
        } else {
            gj["null"] = nullptr;
        }
        groups[key] = std::move(gj);
    }
    j["groups"] = std::move(groups);
    return j;
}

StateSnapshot snapshot_from_json(const json& j) {
    StateSnapshot snap;
    try {
        snap.version = j.at("version").get<int>();
        if (snap.version != kSnapshotVersion) {
            throw InputError("snapshot: unsupported version " + std::to_string(snap.version));
        }
        snap.built_at = Date::parse(j.at("built_at").get<std::string>());
        for (const auto& [code, sj] : j.at("streams").items()) snap.streams[code] = stream_from(sj);
        for (const auto& [key, gj] : j.at("groups").items()) {
            GroupState g;
            g.key = key;
            g.members = gj.at("members").get<std::vector<std::string>>();
            g.monitor = monitor_from(gj.at("monitor"));
            if (!gj.at("null").is_null()) {
                const json& nj = gj.at("null");
                PooledNull null;
                null.group = nj.at("group").get<std::vector<std::string>>();
                null.stats = nj.at("stats").get<std::vector<double>>();
                null.built_at = Date::parse(nj.at("built_at").get<std::string>());
                g.null = std::move(null);
            }
            snap.groups[key] = std::move(g);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("snapshot: ") + e.what());
    }
    return snap;
}

std::string serialize_snapshot(const StateSnapshot& snapshot) { return to_json(snapshot).dump(); }

StateSnapshot parse_snapshot(const std::string& bytes) {
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("snapshot: ") + e.what());
    }
    return snapshot_from_json(j);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write " + tmp);
        out << contents;
        if (!out) throw InputError("cannot write " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void save_snapshot(const std::filesystem::path& path, const StateSnapshot& snapshot) {
    write_file_atomic(path, serialize_snapshot(snapshot));
}

StateSnapshot load_snapshot(const std::filesystem::path& path) { return parse_snapshot(read_file(path)); }

}  // namespace flash
