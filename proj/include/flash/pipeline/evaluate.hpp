#pragma once

#include "flash/evalkit.hpp"
#include "flash/scoring.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace flash {

inline constexpr std::string_view kLabelsHeader =
    "region_code,date,rater_id,warrants,rank,assistive_likelihood";

/// Labels table; `warrants` is 0/1 (or true/false), `rank` and
/// `assistive_likelihood` may be empty.
std::vector<eval::LabelRow> parse_labels(std::istream& in, const std::string& source = "<labels>");
std::vector<eval::LabelRow> read_labels(const std::filesystem::path& path);

/// Scores stored flags against rater labels, one candidate set per region:
/// top-k binary metrics with k = number of majority-marked points, ranking
/// metrics per rater over the majority-marked subset, assistive rank and the
/// Copeland aggregate of rater ranks. Every labeled point must have a flag.
nlohmann::json evaluate(const std::vector<FlagRecord>& flags, const std::vector<eval::LabelRow>& labels,
                        double rbo_persistence = 0.9);

}  // namespace flash
