#include "flash/pipeline/evaluate.hpp"

#include <fstream>
#include <sstream>

namespace flash {

using nlohmann::json;
using eval::PointRef;

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return nullptr;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / double(xs.size());
}

}  // namespace

std::vector<eval::LabelRow> parse_labels(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw InputError(source + ": empty labels table");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kLabelsHeader) {
        throw InputError(source + ":1: expected header '" + std::string(kLabelsHeader) + "'");
    }
    std::vector<eval::LabelRow> rows;
    std::set<std::tuple<std::string, std::int64_t, std::string>> seen;
    for (std::size_t n = 2; std::getline(in, line); ++n) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(n) + ": ";
        const auto f = split_csv(line);
        if (f.size() != 6) throw InputError(where + "expected 6 fields");
        eval::LabelRow row;
        try {
            row.point = {f[0], Date::parse(f[1])};
        } catch (const InputError& e) {
            throw InputError(where + e.what());
        }
        row.rater = f[2];
        if (row.point.region.empty() || row.rater.empty()) throw InputError(where + "empty region or rater");
        if (f[3] == "1" || f[3] == "true") row.warrants = true;
        else if (f[3] == "0" || f[3] == "false") row.warrants = false;
        else throw InputError(where + "warrants must be 0/1");
        if (!f[4].empty()) {
            std::size_t used = 0;
            int r = 0;
            try {
                r = std::stoi(f[4], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != f[4].size() || r < 1) throw InputError(where + "rank must be a positive integer");
            row.rank = r;
        }
        if (!f[5].empty()) {
            try {
                row.likelihood = eval::parse_likelihood(f[5]);
            } catch (const InputError& e) {
                throw InputError(where + e.what());
            }
        }
        if (!seen.insert({row.point.region, row.point.date.serial(), row.rater}).second) {
            throw InputError(where + "duplicate (region, date, rater)");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<eval::LabelRow> read_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return parse_labels(in, path.string());
}

json evaluate(const std::vector<FlagRecord>& flags, const std::vector<eval::LabelRow>& labels,
              double rbo_persistence) {
    std::map<PointRef, double> score;
    for (const auto& f : flags) score[{f.region, f.date}] = f.rank_score;

    std::map<std::string, std::vector<eval::LabeledPoint>> by_region;
    for (auto& lp : eval::aggregate_labels(labels)) by_region[lp.point.region].push_back(std::move(lp));

    std::vector<double> acc, bacc, f1, auc, hamming, rbo, corr, assist;
    json regions = json::object();
    for (const auto& [region, points] : by_region) {
        std::vector<std::pair<PointRef, double>> scored;
        std::set<PointRef> truth;
        for (const auto& lp : points) {
            auto it = score.find(lp.point);
            if (it == score.end()) {
                throw LookupError("labeled point has no flag: " + region + " " + lp.point.date.iso());
            }
            scored.emplace_back(lp.point, it->second);
            if (lp.warrants_investigation) truth.insert(lp.point);
        }
        const eval::AlgorithmRanking ranking(std::move(scored));
        const std::set<PointRef> predicted =
            truth.empty() ? std::set<PointRef>{} : eval::binarize_topk(ranking, truth.size());
        const eval::BinaryMetrics bm = eval::binary_metrics(predicted, truth, ranking);
        acc.push_back(bm.accuracy);
        if (bm.balanced_accuracy) bacc.push_back(*bm.balanced_accuracy);
        if (bm.f1) f1.push_back(*bm.f1);
        if (bm.roc_auc) auc.push_back(*bm.roc_auc);

        // Rater ranks over the majority subset; raters who skipped a point are left out.
        const std::vector<PointRef> algo_order = ranking.restricted_to(truth).order();
        std::map<std::string, std::map<PointRef, int>> rater_ranks;
        for (const auto& lp : points) {
            if (!lp.warrants_investigation) continue;
            for (const auto& [rater, r] : lp.per_rater_rank) rater_ranks[rater][lp.point] = r;
        }
        json raters = json::object();
        std::vector<std::map<PointRef, int>> complete;
        for (const auto& [rater, ranks] : rater_ranks) {
            if (ranks.size() != truth.size()) continue;
            const eval::RankingMetrics rm = eval::ranking_metrics(algo_order, ranks, rbo_persistence);
            raters[rater] = {{"hamming", rm.hamming}, {"rbo", rm.rbo}, {"swap_corr", opt(rm.swap_corr)}};
            hamming.push_back(rm.hamming);
            rbo.push_back(rm.rbo);
            if (rm.swap_corr) corr.push_back(*rm.swap_corr);
            complete.push_back(ranks);
        }
        json copeland = json::array();
        if (!complete.empty()) {
            for (const auto& e : eval::copeland_aggregate(complete)) {
                copeland.push_back({{"region", e.item.region},
                                    {"date", e.item.date.iso()},
                                    {"score", e.score},
                                    {"rank", e.rank}});
            }
        }
        const std::optional<double> ar = eval::assistive_rank(ranking, points);
        if (ar) assist.push_back(*ar);

        json order = json::array();
        for (const auto& [p, s] : ranking.entries()) {
            order.push_back({{"date", p.date.iso()}, {"rank_score", s}, {"warrants", truth.count(p) != 0}});
        }
        regions[region] = {{"candidates", ranking.size()},
                           {"warranting", truth.size()},
                           {"ranking", order},
                           {"accuracy", bm.accuracy},
                           {"balanced_accuracy", opt(bm.balanced_accuracy)},
                           {"f1", opt(bm.f1)},
                           {"roc_auc", opt(bm.roc_auc)},
                           {"raters", raters},
                           {"assistive_rank", opt(ar)},
                           {"copeland", copeland}};
    }
    return {{"regions", regions},
            {"summary",
             {{"accuracy", mean_of(acc)},
              {"balanced_accuracy", mean_of(bacc)},
              {"f1", mean_of(f1)},
              {"roc_auc", mean_of(auc)},
              {"hamming", mean_of(hamming)},
              {"rbo", mean_of(rbo)},
              {"swap_corr", mean_of(corr)},
              {"assistive_rank", mean_of(assist)}}}};
}

}  // namespace flash
