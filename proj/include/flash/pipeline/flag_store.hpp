#pragma once

#include "flash/scoring.hpp"

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace flash {

/// Append-only JSON-lines log of scored flags and review events, keyed by
/// (region, date). Reading replays the log; for each key the latest flag
/// line wins and the latest review event sets the review status.
/// Thread-safe; writes are serialized.
class FlagStore {
public:
    explicit FlagStore(std::filesystem::path file);

    void append_flags(const std::vector<FlagRecord>& flags);

    /// Records a review; throws LookupError if the flag does not exist.
    FlagRecord review(const std::string& region, Date date, bool reviewed,
                      std::optional<std::string> note, const std::string& timestamp);

    std::optional<FlagRecord> find(const std::string& region, Date date) const;
    /// Flags of one date in rank order.
    std::vector<FlagRecord> on(Date date) const;
    /// Flags of the `window` most recent dates up to and including `date`, ranked together.
    std::vector<FlagRecord> window(Date date, int window) const;
    std::vector<FlagRecord> all() const;
    std::vector<Date> dates() const;

    /// Reloads from disk, e.g. after another process appended.
    void reload();

private:
    using Key = std::pair<std::string, std::int64_t>;
    void apply_line(const std::string& line);
    void append_line(const std::string& line);

    std::filesystem::path file_;
    mutable std::mutex mutex_;
    std::map<Key, FlagRecord> flags_;
};

}  // namespace flash
