#include "flash/pipeline/evaluate.hpp"
#include "flash/pipeline/flag_store.hpp"
#include "flash/pipeline/ingest.hpp"
#include "flash/pipeline/service.hpp"
#include "flash/pipeline/state_dir.hpp"
#include "flash/synthetic.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

flash::ReviewService* g_service = nullptr;

void print_flags(const std::vector<flash::FlagRecord>& flags, std::size_t top) {
    std::printf("%-4s %-10s %-10s %-9s %-9s %-10s %-10s %s\n", "rank", "region", "date", "score", "p",
                "observed", "predicted", "category");
    for (std::size_t i = 0; i < flags.size() && i < top; ++i) {
        const auto& f = flags[i];
        std::printf("%-4zu %-10s %-10s %-9.6f %-9.6f %-10.1f %-10.1f %s\n", i + 1, f.region.c_str(),
                    f.date.iso().c_str(), f.rank_score, f.p_value, f.observed, f.predicted,
                    f.category ? std::string(flash::to_string(*f.category)).c_str() : "-");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FlaSH: ranked outlier flags for daily surveillance streams"};
    app.require_subcommand(1);

    std::string config, data, out, state, date, obs, labels;
    int window = 1, port = 8080, top = 20;
    std::string host = "127.0.0.1";

    auto* train = app.add_subcommand("train", "train a state directory from a data table");
    train->add_option("--config", config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    train->add_option("--data", data, "input data table")->required()->check(CLI::ExistingFile);
    train->add_option("--out", out, "state directory to create or replace")->required();

    auto* score = app.add_subcommand("score", "score one new date");
    score->add_option("--state", state, "state directory")->required()->check(CLI::ExistingDirectory);
    score->add_option("--date", date, "date being scored (YYYY-MM-DD)")->required();
    score->add_option("--obs", obs, "observations for that date")->required()->check(CLI::ExistingFile);
    score->add_option("--window", window, "rank flags of the most recent n dates together")
        ->check(CLI::PositiveNumber);
    score->add_option("--top", top, "rows to print")->check(CLI::NonNegativeNumber);

    auto* evaluate = app.add_subcommand("evaluate", "score stored flags against rater labels");
    evaluate->add_option("--state", state, "state directory")->required()->check(CLI::ExistingDirectory);
    evaluate->add_option("--labels", labels, "labels table")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--out", out, "report path (JSON)")->required();

    auto* retrain = app.add_subcommand("retrain", "retrain from all stored data");
    retrain->add_option("--state", state, "state directory")->required()->check(CLI::ExistingDirectory);

    auto* serve = app.add_subcommand("serve", "run the review API");
    serve->add_option("--state", state, "state directory")->required()->check(CLI::ExistingDirectory);
    serve->add_option("--port", port, "TCP port")->required()->check(CLI::Range(1, 65535));
    serve->add_option("--host", host, "bind address");

    int days = 60, counties = 3284;
    std::uint64_t seed = 1;
    std::string start = "2021-01-04";
    auto* synth = app.add_subcommand("synth", "write a synthetic registry, data table and config");
    synth->add_option("--out", out, "output directory")->required();
    synth->add_option("--days", days, "days of data")->check(CLI::PositiveNumber);
    synth->add_option("--counties", counties, "number of counties")->check(CLI::NonNegativeNumber);
    synth->add_option("--start", start, "first date");
    synth->add_option("--seed", seed, "random seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            flash::PipelineConfig cfg = flash::load_config(config);
            const auto snap = flash::train_into({out}, cfg, data);
            std::size_t short_count = 0;
            for (const auto& [code, s] : snap.streams) short_count += s.short_series;
            std::printf("trained %zu streams (%zu short) in %zu groups through %s\n", snap.streams.size(),
                        short_count, snap.groups.size(), snap.built_at.iso().c_str());
        } else if (*score) {
            const flash::StateDir dir{state};
            const auto report = flash::score_into(dir, flash::Date::parse(date), obs);
            for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
            const auto flags = window > 1 ? flash::FlagStore(dir.flags()).window(report.date, window)
                                          : report.flags;
            print_flags(flags, std::size_t(top));
            for (const auto& d : report.decisions) {
                if (d.decision != flash::RetrainDecision::none) {
                    std::printf("retrain suggested for %s (%s)\n", d.group.c_str(),
                                std::string(flash::to_string(d.decision)).c_str());
                }
            }
        } else if (*evaluate) {
            const flash::StateDir dir{state};
            const auto result = flash::evaluate(flash::FlagStore(dir.flags()).all(), flash::read_labels(labels));
            flash::write_file_atomic(out, result.dump(2) + "\n");
            std::cout << result.at("summary").dump(2) << "\n";
        } else if (*retrain) {
            const auto snap = flash::retrain({state});
            std::printf("retrained %zu streams through %s\n", snap.streams.size(), snap.built_at.iso().c_str());
        } else if (*serve) {
            flash::ReviewService service({state});
            g_service = &service;
            std::signal(SIGINT, [](int) { if (g_service) g_service->stop(); });
            std::signal(SIGTERM, [](int) { if (g_service) g_service->stop(); });
            std::printf("listening on %s:%d\n", host.c_str(), port);
            std::fflush(stdout);
            if (!service.listen(host, port)) {
                std::fprintf(stderr, "error: cannot bind %s:%d\n", host.c_str(), port);
                return 1;
            }
        } else if (*synth) {
            std::filesystem::create_directories(out);
            const auto registry = flash::synth::make_registry(56, 5, counties, seed);
            const auto series = flash::synth::make_dataset(registry, flash::Date::parse(start), days, seed);
            std::ofstream regions(std::filesystem::path(out) / "regions.csv");
            flash::write_regions(regions, registry);
            std::ofstream rows(std::filesystem::path(out) / "data.csv");
            flash::write_series(rows, series);
            flash::PipelineConfig cfg;
            cfg.regions = "regions.csv";
            std::ofstream(std::filesystem::path(out) / "config.json") << flash::to_json(cfg).dump(2) << "\n";
            std::printf("wrote %zu streams x %d days to %s\n", series.size(), days, out.c_str());
        }
    } catch (const flash::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
