#include "flash/pipeline/flag_store.hpp"

#include "flash/pipeline/engine.hpp"

#include <fstream>
#include <set>

namespace flash {

using nlohmann::json;

FlagStore::FlagStore(std::filesystem::path file) : file_(std::move(file)) { reload(); }

void FlagStore::reload() {
    std::lock_guard lock(mutex_);
    flags_.clear();
    std::ifstream in(file_);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) apply_line(line);
    }
}

void FlagStore::apply_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw InputError("flag store " + file_.string() + ": " + e.what());
    }
    const std::string kind = j.value("kind", "");
    if (kind == "flag") {
        FlagRecord f = flag_from_json(j.at("flag"));
        Key key{f.region, f.date.serial()};
        // A rescored flag keeps the review status it already had.
        if (auto it = flags_.find(key); it != flags_.end()) {
            f.reviewed = it->second.reviewed;
            f.reviewer_note = it->second.reviewer_note;
        }
        flags_[key] = std::move(f);
    } else if (kind == "review") {
        Key key{j.at("region").get<std::string>(), Date::parse(j.at("date").get<std::string>()).serial()};
        auto it = flags_.find(key);
        if (it == flags_.end()) return;
        it->second.reviewed = j.at("reviewed").get<bool>();
        if (j.at("note").is_null()) it->second.reviewer_note.reset();
        else it->second.reviewer_note = j.at("note").get<std::string>();
    } else {
        throw InputError("flag store " + file_.string() + ": unknown entry kind '" + kind + "'");
    }
}

void FlagStore::append_line(const std::string& line) {
    std::ofstream out(file_, std::ios::app);
    if (!out) throw InputError("cannot append to " + file_.string());
    out << line << '\n';
}

void FlagStore::append_flags(const std::vector<FlagRecord>& flags) {
    std::lock_guard lock(mutex_);
    std::string block;
    for (const auto& f : flags) {
        const std::string line = json{{"kind", "flag"}, {"flag", to_json(f)}}.dump();
        apply_line(line);
        block += line;
        block += '\n';
    }
    std::ofstream out(file_, std::ios::app);
    if (!out) throw InputError("cannot append to " + file_.string());
    out << block;
}

FlagRecord FlagStore::review(const std::string& region, Date date, bool reviewed,
                             std::optional<std::string> note, const std::string& timestamp) {
    std::lock_guard lock(mutex_);
    if (!flags_.count({region, date.serial()})) {
        throw LookupError("no flag for " + region + " on " + date.iso());
    }
    const std::string line = json{{"kind", "review"},
                                  {"region", region},
                                  {"date", date.iso()},
                                  {"reviewed", reviewed},
                                  {"note", note ? json(*note) : json(nullptr)},
                                  {"at", timestamp}}
                                 .dump();
    append_line(line);
    apply_line(line);
    return flags_.at({region, date.serial()});
}

std::optional<FlagRecord> FlagStore::find(const std::string& region, Date date) const {
    std::lock_guard lock(mutex_);
    auto it = flags_.find({region, date.serial()});
    if (it == flags_.end()) return std::nullopt;
    return it->second;
}

std::vector<FlagRecord> FlagStore::on(Date date) const { return window(date, 1); }

std::vector<FlagRecord> FlagStore::window(Date date, int window) const {
    std::lock_guard lock(mutex_);
    std::set<std::int64_t> dates;
    for (const auto& [key, f] : flags_) {
        if (key.second <= date.serial()) dates.insert(key.second);
    }
    std::set<std::int64_t> keep;
    for (auto it = dates.rbegin(); it != dates.rend() && int(keep.size()) < window; ++it) keep.insert(*it);
    if (!keep.count(date.serial())) return {};
    std::vector<FlagRecord> out;
    for (const auto& [key, f] : flags_) {
        if (keep.count(key.second)) out.push_back(f);
    }
    return rank_flags(std::move(out));
}

std::vector<FlagRecord> FlagStore::all() const {
    std::lock_guard lock(mutex_);
    std::vector<FlagRecord> out;
    for (const auto& kv : flags_) out.push_back(kv.second);
    return out;
}

std::vector<Date> FlagStore::dates() const {
    std::lock_guard lock(mutex_);
    std::set<std::int64_t> serials;
    for (const auto& kv : flags_) serials.insert(kv.first.second);
    std::vector<Date> out;
    for (auto s : serials) out.push_back(Date(std::chrono::sys_days(std::chrono::days(s))));
    return out;
}

}  // namespace flash
