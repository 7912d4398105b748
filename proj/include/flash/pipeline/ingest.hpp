#pragma once

#include "flash/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace flash {

inline constexpr std::string_view kDataHeader = "date,region_code,region_level,value";
inline constexpr std::string_view kRegionsHeader = "region_code,region_level,parent_code,population";

/// Region metadata table. Rows may appear in any order.
RegionRegistry load_regions(const std::filesystem::path& path);
RegionRegistry parse_regions(std::istream& in, const std::string& source = "<regions>");
void write_regions(std::ostream& out, const RegionRegistry& registry);

struct Observation {
    std::size_t line = 0;
    Date date;
    std::string region;
    double value = kMissing;  // empty or NA fields are missing
};

/// Parses the data table, rejecting malformed rows, unknown regions, level
/// mismatches and duplicate (region, date) pairs, each with its line number.
std::vector<Observation> parse_observations(std::istream& in, const RegionRegistry& registry,
                                            const std::string& source = "<data>");
std::vector<Observation> read_observations(const std::filesystem::path& path,
                                           const RegionRegistry& registry);

/// One series per region, sorted by code, densified over the region's own
/// first..last date with missing markers in the gaps.
std::vector<StreamSeries> build_series(const std::vector<Observation>& observations,
                                       const RegionRegistry& registry);

std::vector<StreamSeries> ingest_csv(const std::filesystem::path& path, const RegionRegistry& registry);

/// Writes series back in the data table schema; missing days become empty fields.
void write_series(std::ostream& out, const std::vector<StreamSeries>& series);

}  // namespace flash
