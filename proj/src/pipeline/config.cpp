#include "flash/pipeline/config.hpp"

#include <fstream>
#include <set>
#include <thread>

namespace flash {

using nlohmann::json;

void PipelineConfig::validate() const {
    const auto fail = [](const std::string& what) { throw InputError("config: " + what); };
    if (!(z_threshold > 0.0)) fail("z_threshold must be > 0");
    if (pelt_penalty && !(*pelt_penalty >= 0.0)) fail("pelt_penalty must be >= 0");
    if (min_spacing < 2) fail("min_spacing must be >= 2");
    if (ar_lag < 1 || ar_lag > 60) fail("ar_lag must be in [1, 60]");
    if (!(ridge >= 0.0)) fail("ridge must be >= 0");
    if (!(ks_alpha > 0.0 && ks_alpha < 1.0)) fail("ks_alpha must be in (0, 1)");
    if (retrain_max_age_days < 1) fail("retrain_max_age_days must be >= 1");
    if (short_series_cutoff < 30 + ar_lag + 1) {
        fail("short_series_cutoff must be >= " + std::to_string(30 + ar_lag + 1));
    }
    if (!(iqr_multiplier > 0.0)) fail("iqr_multiplier must be > 0");
}

unsigned PipelineConfig::worker_count() const {
    if (workers > 0) return workers;
    return std::max(1u, std::thread::hardware_concurrency());
}

json to_json(const PipelineConfig& cfg) {
    json j;
    j["z_threshold"] = cfg.z_threshold;
    j["pelt_penalty"] = cfg.pelt_penalty ? json(*cfg.pelt_penalty) : json("bic");
    j["min_spacing"] = cfg.min_spacing;
    j["ar_lag"] = cfg.ar_lag;
    j["ridge"] = cfg.ridge;
    j["ks_alpha"] = cfg.ks_alpha;
    j["retrain_max_age_days"] = cfg.retrain_max_age_days;
    j["short_series_cutoff"] = cfg.short_series_cutoff;
    j["iqr_multiplier"] = cfg.iqr_multiplier;
    j["regions"] = cfg.regions;
    j["state_dir"] = cfg.state_dir;
    j["workers"] = cfg.workers;
    return j;
}

PipelineConfig config_from_json(const json& j) {
    if (!j.is_object()) throw InputError("config: expected a JSON object");
    static const std::set<std::string> known{
        "z_threshold", "pelt_penalty", "min_spacing",  "ar_lag",   "ridge",     "ks_alpha",
        "retrain_max_age_days", "short_series_cutoff", "iqr_multiplier", "regions", "state_dir",
        "workers"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw InputError("config: unknown key '" + key + "'");
    }
    PipelineConfig cfg;
    try {
        if (j.contains("z_threshold")) cfg.z_threshold = j.at("z_threshold").get<double>();
        if (j.contains("pelt_penalty")) {
            const json& p = j.at("pelt_penalty");
            if (p.is_string()) {
                if (p.get<std::string>() != "bic") throw InputError("config: pelt_penalty must be \"bic\" or a number");
                cfg.pelt_penalty.reset();
            } else {
                cfg.pelt_penalty = p.get<double>();
            }
        }
        if (j.contains("min_spacing")) cfg.min_spacing = j.at("min_spacing").get<int>();
        if (j.contains("ar_lag")) cfg.ar_lag = j.at("ar_lag").get<int>();
        if (j.contains("ridge")) cfg.ridge = j.at("ridge").get<double>();
        if (j.contains("ks_alpha")) cfg.ks_alpha = j.at("ks_alpha").get<double>();
        if (j.contains("retrain_max_age_days")) cfg.retrain_max_age_days = j.at("retrain_max_age_days").get<std::int64_t>();
        if (j.contains("short_series_cutoff")) cfg.short_series_cutoff = j.at("short_series_cutoff").get<std::int64_t>();
        if (j.contains("iqr_multiplier")) cfg.iqr_multiplier = j.at("iqr_multiplier").get<double>();
        if (j.contains("regions")) cfg.regions = j.at("regions").get<std::string>();
        if (j.contains("state_dir")) cfg.state_dir = j.at("state_dir").get<std::string>();
        if (j.contains("workers")) cfg.workers = j.at("workers").get<unsigned>();
    } catch (const json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("config: cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("config: " + path.string() + ": " + e.what());
    }
    PipelineConfig cfg = config_from_json(j);
    if (!cfg.regions.empty() && std::filesystem::path(cfg.regions).is_relative()) {
        cfg.regions = (path.parent_path() / cfg.regions).lexically_normal().string();
    }
    return cfg;
}

}  // namespace flash
