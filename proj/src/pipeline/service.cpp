#include "flash/pipeline/service.hpp"

#include "flash/pipeline/engine.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdio>

namespace flash {

using nlohmann::json;

namespace {

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send(res, status, json{{"error", message}});
}

std::string utc_timestamp() {
    const auto now = std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now());
    const auto day = std::chrono::floor<std::chrono::days>(now);
    const std::chrono::hh_mm_ss tod(now - day);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02d.%03dZ",
                  Date(day).iso().c_str(), int(tod.hours().count()), int(tod.minutes().count()),
                  int(tod.seconds().count()), int(tod.subseconds().count()));
    return buf;
}

json series_json(const Vector& v, Eigen::Index begin, Eigen::Index end) {
    json out = json::array();
    for (Eigen::Index i = begin; i < end && i < v.size(); ++i) {
        out.push_back(std::isfinite(v[i]) ? json(v[i]) : json(nullptr));
    }
    return out;
}

Date query_date(const httplib::Request& req) {
    if (!req.has_param("date")) throw InputError("missing 'date' query parameter");
    return Date::parse(req.get_param_value("date"));
}

}  // namespace

ReviewService::ReviewService(StateDir dir)
    : dir_(std::move(dir)),
      server_(std::make_unique<httplib::Server>()),
      flags_(dir_.flags()),
      snapshot_(std::make_shared<const StateSnapshot>(load_snapshot(dir_.snapshot()))) {
    routes();
}

ReviewService::~ReviewService() {
    stop();
    wait_for_retrain();
}

std::shared_ptr<const StateSnapshot> ReviewService::snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return snapshot_;
}

bool ReviewService::listen(const std::string& host, int port) { return server_->listen(host, port); }

int ReviewService::bind_any(const std::string& host) { return server_->bind_to_any_port(host); }

void ReviewService::run() { server_->listen_after_bind(); }

void ReviewService::stop() { server_->stop(); }

void ReviewService::wait_for_retrain() {
    std::lock_guard lock(retrain_mutex_);
    if (retrain_thread_.joinable()) retrain_thread_.join();
}

void ReviewService::start_retrain() {
    std::lock_guard lock(retrain_mutex_);
    if (retrain_running_) return;
    if (retrain_thread_.joinable()) retrain_thread_.join();
    retrain_running_ = true;
    retrain_thread_ = std::thread([this] {
        try {
            auto fresh = std::make_shared<const StateSnapshot>(retrain(dir_));
            flags_.reload();
            std::lock_guard snap_lock(snapshot_mutex_);
            snapshot_ = std::move(fresh);
            last_retrain_error_.clear();
        } catch (const std::exception& e) {
            std::lock_guard snap_lock(snapshot_mutex_);
            last_retrain_error_ = e.what();
        }
        ++retrains_completed_;
        retrain_running_ = false;
    });
}

void ReviewService::routes() {
    auto& srv = *server_;

    srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const LookupError& e) {
            send_error(res, 404, e.what());
        } catch (const InputError& e) {
            send_error(res, 400, e.what());
        } catch (const json::exception& e) {
            send_error(res, 400, e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    });

    srv.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        const auto snap = snapshot();
        std::string error;
        {
            std::lock_guard lock(snapshot_mutex_);
            error = last_retrain_error_;
        }
        send(res, 200,
             {{"status", "ok"},
              {"built_at", snap->built_at.iso()},
              {"streams", snap->streams.size()},
              {"groups", snap->groups.size()},
              {"retrain_running", retrain_running_.load()},
              {"retrains_completed", retrains_completed_.load()},
              {"last_retrain_error", error.empty() ? json(nullptr) : json(error)}});
    });

    srv.Get("/flags", [this](const httplib::Request& req, httplib::Response& res) {
        const Date date = query_date(req);
        int window = 1;
        if (req.has_param("window")) {
            window = std::stoi(req.get_param_value("window"));
            if (window < 1) throw InputError("window must be >= 1");
        }
        const auto flags = flags_.window(date, window);
        if (flags.empty()) throw LookupError("no flags for " + date.iso());
        json list = json::array();
        for (const auto& f : flags) list.push_back(to_json(f));
        send(res, 200, {{"date", date.iso()}, {"window", window}, {"flags", list}});
    });

    srv.Get(R"(/streams/([^/]+)/detail)", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string region = req.matches[1];
        const Date date = query_date(req);
        const auto snap = snapshot();
        auto it = snap->streams.find(region);
        if (it == snap->streams.end()) throw LookupError("unknown region " + region);
        const StreamState& s = it->second;
        if (date < s.start || date > s.last_date()) {
            throw LookupError(region + " has no data on " + date.iso());
        }
        const auto end = Eigen::Index(date - s.start) + 1;

        json regimes = json::array();
        for (const auto& r : s.regimes) {
            regimes.push_back({{"start", (s.start + r.begin).iso()},
                               {"end", (s.start + (r.end - 1)).iso()},
                               {"weekday_factors", r.weekday.factors},
                               {"corrected_mean", r.corrected_mean},
                               {"corrected_sd", r.corrected_sd}});
        }
        json labels = json::array();
        for (Eigen::Index i = 0; i < end && i < Eigen::Index(s.labels.size()); ++i) {
            if (s.labels[i]) {
                labels.push_back({{"date", (s.start + i).iso()},
                                  {"category", std::string(to_string(*s.labels[i]))}});
            }
        }
        json body = {{"region", region},
                     {"level", std::string(to_string(s.region.level))},
                     {"population", s.population},
                     {"group", s.group},
                     {"short_series", s.short_series},
                     {"start", s.start.iso()},
                     {"date", date.iso()},
                     {"raw", series_json(s.raw, 0, end)},
                     {"imputed", series_json(s.imputed, 0, end)},
                     {"corrected", series_json(s.corrected, 0, end)},
                     {"labels", labels},
                     {"regimes", regimes},
                     {"training",
                      {{"train_begin", (s.start + s.split.train_begin).iso()},
                       {"train_end", (s.start + (s.split.train_end - 1)).iso()},
                       {"ar_weights", std::vector<double>(s.model.weights.data(),
                                                          s.model.weights.data() + s.model.weights.size())}}}};
        if (auto flag = flags_.find(region, date)) {
            body["flag"] = to_json(*flag);
            body["score"] = {{"predicted", flag->predicted},
                             {"corrected", flag->corrected},
                             {"k", flag->k},
                             {"p_value", flag->p_value},
                             {"rank_score", flag->rank_score}};
        } else {
            body["flag"] = nullptr;
            body["score"] = nullptr;
        }
        send(res, 200, body);
    });

    srv.Post(R"(/flags/([^/]+)/([^/]+)/review)", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string region = req.matches[1];
        const Date date = Date::parse(req.matches[2].str());
        const json body = json::parse(req.body);
        if (!body.is_object() || !body.contains("reviewed") || !body.at("reviewed").is_boolean()) {
            throw InputError("body must be an object with boolean 'reviewed'");
        }
        for (const auto& [key, value] : body.items()) {
            if (key != "reviewed" && key != "note") throw InputError("unknown field '" + key + "'");
        }
        std::optional<std::string> note;
        if (body.contains("note") && !body.at("note").is_null()) note = body.at("note").get<std::string>();
        const FlagRecord updated = flags_.review(region, date, body.at("reviewed").get<bool>(), note, utc_timestamp());
        send(res, 200, to_json(updated));
    });

    srv.Post("/retrain", [this](const httplib::Request&, httplib::Response& res) {
        const bool already = retrain_running_;
        start_retrain();
        send(res, 202, {{"status", already ? "running" : "queued"}});
    });
}

}  // namespace flash
