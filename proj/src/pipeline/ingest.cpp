#include "flash/pipeline/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace flash {

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t begin = 0;
    while (true) {
        const std::size_t comma = line.find(',', begin);
        fields.push_back(line.substr(begin, comma == std::string_view::npos ? comma : comma - begin));
        if (comma == std::string_view::npos) break;
        begin = comma + 1;
    }
    return fields;
}

std::string_view chomp(const std::string& line) {
    std::string_view v(line);
    if (!v.empty() && v.back() == '\r') v.remove_suffix(1);
    return v;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
    throw InputError(source + ":" + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view text, const std::string& source, std::size_t line) {
    std::string s(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        fail(source, line, "invalid number '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v)) fail(source, line, "invalid number '" + s + "'");
    return v;
}

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return in;
}

}  // namespace

RegionRegistry parse_regions(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line) || chomp(line) != kRegionsHeader) {
        fail(source, 1, "header must be '" + std::string(kRegionsHeader) + "'");
    }
    struct Row {
        std::size_t line;
        RegionId region;
        std::int64_t population;
    };
    std::vector<Row> rows;
    for (std::size_t n = 2; std::getline(in, line); ++n) {
        const auto text = chomp(line);
        if (text.empty()) continue;
        const auto f = split(text);
        if (f.size() != 4) fail(source, n, "expected 4 fields");
        Row row{n, {std::string(f[0]), RegionLevel::county, std::nullopt}, 0};
        if (row.region.code.empty()) fail(source, n, "empty region code");
        try {
            row.region.level = parse_region_level(f[1]);
        } catch (const InputError& e) {
            fail(source, n, e.what());
        }
        if (!f[2].empty()) row.region.parent = std::string(f[2]);
        const double pop = parse_number(f[3], source, n);
        if (pop < 1 || pop != std::floor(pop)) fail(source, n, "population must be a positive integer");
        row.population = std::int64_t(pop);
        rows.push_back(std::move(row));
    }
    // Parents are registered before children.
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        const auto depth = [](RegionLevel l) {
            return l == RegionLevel::nation ? 0 : l == RegionLevel::county ? 2 : 1;
        };
        return depth(a.region.level) < depth(b.region.level);
    });
    RegionRegistry registry;
    for (auto& row : rows) {
        try {
            registry.add(std::move(row.region), row.population);
        } catch (const InputError& e) {
            fail(source, row.line, e.what());
        }
    }
    return registry;
}

RegionRegistry load_regions(const std::filesystem::path& path) {
    auto in = open(path);
    return parse_regions(in, path.string());
}

void write_regions(std::ostream& out, const RegionRegistry& registry) {
    out << kRegionsHeader << '\n';
    for (const std::string& code : registry.codes()) {
        const RegionId& r = registry.find(code);
        out << r.code << ',' << to_string(r.level) << ',' << r.parent.value_or("") << ','
            << registry.population(code) << '\n';
    }
}

std::vector<Observation> parse_observations(std::istream& in, const RegionRegistry& registry,
                                            const std::string& source) {
    std::string line;
    if (!std::getline(in, line) || chomp(line) != kDataHeader) {
        fail(source, 1, "header must be '" + std::string(kDataHeader) + "'");
    }
    std::vector<Observation> out;
    std::set<std::pair<std::string, std::int64_t>> seen;
    for (std::size_t n = 2; std::getline(in, line); ++n) {
        const auto text = chomp(line);
        if (text.empty()) continue;
        const auto f = split(text);
        if (f.size() != 4) fail(source, n, "expected 4 fields");
        Observation obs;
        obs.line = n;
        try {
            obs.date = Date::parse(f[0]);
        } catch (const InputError& e) {
            fail(source, n, e.what());
        }
        obs.region = std::string(f[1]);
        if (!registry.contains(obs.region)) fail(source, n, "unknown region '" + obs.region + "'");
        RegionLevel level{};
        try {
            level = parse_region_level(f[2]);
        } catch (const InputError& e) {
            fail(source, n, e.what());
        }
        if (level != registry.find(obs.region).level) {
            fail(source, n, "region level does not match metadata for '" + obs.region + "'");
        }
        if (!(f[3].empty() || f[3] == "NA")) obs.value = parse_number(f[3], source, n);
        if (!seen.emplace(obs.region, obs.date.serial()).second) {
            fail(source, n, "duplicate row for " + obs.region + " on " + obs.date.iso());
        }
        out.push_back(std::move(obs));
    }
    return out;
}

std::vector<Observation> read_observations(const std::filesystem::path& path,
                                           const RegionRegistry& registry) {
    auto in = open(path);
    return parse_observations(in, registry, path.string());
}

std::vector<StreamSeries> build_series(const std::vector<Observation>& observations,
                                       const RegionRegistry& registry) {
    std::map<std::string, std::vector<const Observation*>> by_region;
    for (const auto& obs : observations) by_region[obs.region].push_back(&obs);

    std::vector<StreamSeries> out;
    out.reserve(by_region.size());
    for (auto& [code, rows] : by_region) {
        std::sort(rows.begin(), rows.end(),
                  [](const Observation* a, const Observation* b) { return a->date < b->date; });
        StreamSeries s;
        s.region = registry.find(code);
        s.population = registry.population(code);
        s.start = rows.front()->date;
        s.values = Vector::Constant(rows.back()->date - s.start + 1, kMissing);
        for (const Observation* obs : rows) s.values[obs->date - s.start] = obs->value;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<StreamSeries> ingest_csv(const std::filesystem::path& path, const RegionRegistry& registry) {
    return build_series(read_observations(path, registry), registry);
}

void write_series(std::ostream& out, const std::vector<StreamSeries>& series) {
    out << kDataHeader << '\n';
    char buf[64];
    for (const auto& s : series) {
        const auto level = to_string(s.region.level);
        for (Eigen::Index i = 0; i < s.length(); ++i) {
            out << s.date_at(i).iso() << ',' << s.region.code << ',' << level << ',';
            if (!is_missing(s.values[i])) {
                auto res = std::to_chars(buf, buf + sizeof buf, s.values[i]);
                out.write(buf, res.ptr - buf);
            }
            out << '\n';
        }
    }
}

}  // namespace flash
