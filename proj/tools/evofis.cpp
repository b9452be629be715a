#include "evofis/bench.hpp"
#include "evofis/errors.hpp"
#include "evofis/synth.hpp"
#include "evofis/version.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string fixed4(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", value);
    return buf;
}

int cmd_synth(const evofis::SynthConfig& cfg, const fs::path& output) {
    const evofis::RawSeries series = evofis::generate_series(cfg);
    if (!output.parent_path().empty()) fs::create_directories(output.parent_path());
    evofis::write_series_csv(output, series);

    fs::path meta_path = output;
    meta_path += ".meta.json";
    std::FILE* meta = std::fopen(meta_path.string().c_str(), "wb");
    if (!meta) throw evofis::Error("cannot write " + meta_path.string());
    const std::string text = evofis::series_metadata(cfg).dump(2) + "\n";
    std::fwrite(text.data(), 1, text.size(), meta);
    std::fclose(meta);

    std::printf("wrote %s (%zu samples, %zu channels)\n", output.string().c_str(),
                series.values.size(), series.channel_count());
    return 0;
}

int cmd_run(const fs::path& config_path, const std::string& output_override, bool freeze,
            const std::string& format) {
    evofis::ExperimentConfig cfg = evofis::load_experiment_config(config_path);
    if (!output_override.empty()) cfg.output_dir = output_override;

    const evofis::RunArtifacts artifacts = evofis::run_experiment(cfg, freeze);

    if (format == "json") {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& report : artifacts.reports) {
            out.push_back({{"problem", report.problem},
                           {"algorithm", report.algorithm},
                           {"rmse", report.rmse},
                           {"ndei", report.ndei},
                           {"final_rule_count", report.final_rule_count}});
        }
        std::printf("%s\n", out.dump(2).c_str());
    } else {
        std::printf("problem,algorithm,rmse,ndei,rules\n");
        for (const auto& report : artifacts.reports) {
            std::printf("%s,%s,%s,%s,%d\n", report.problem.c_str(), report.algorithm.c_str(),
                        fixed4(report.rmse).c_str(), fixed4(report.ndei).c_str(),
                        report.final_rule_count);
        }
    }
    std::fprintf(stderr, "wrote %zu reports and %s\n", artifacts.report_paths.size(),
                 artifacts.manifest_path.string().c_str());
    return 0;
}

int cmd_stats(const std::string& scores_file, const std::vector<std::string>& reports_dirs,
              const fs::path& output, const std::string& format) {
    evofis::ScoreMatrix matrix;
    if (!scores_file.empty()) {
        matrix = evofis::score_matrix_from_csv(evofis::csv::read_file(scores_file));
    } else {
        std::vector<fs::path> files;
        for (const std::string& reports_dir : reports_dirs) {
            if (!fs::is_directory(reports_dir))
                throw evofis::ConfigError("--reports expects directories, got " + reports_dir);
            for (const auto& entry : fs::directory_iterator(reports_dir)) {
                const std::string name = entry.path().filename().string();
                if (entry.is_regular_file() && name.rfind("report_", 0) == 0 &&
                    entry.path().extension() == ".json")
                    files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        matrix = evofis::score_matrix_from_reports(files);
    }

    const evofis::StatsArtifacts stats = evofis::run_stats(matrix, output);

    if (format == "json") {
        std::printf("%s\n", evofis::stats_to_json(stats).dump(2).c_str());
        return 0;
    }
    std::printf("average ranks:\n");
    for (std::size_t c = 0; c < stats.table.algorithms.size(); ++c) {
        std::printf("  %-10s %s\n", stats.table.algorithms[c].c_str(),
                    fixed4(stats.table.average_ranks[static_cast<Eigen::Index>(c)]).c_str());
    }
    if (stats.friedman_ran) {
        std::printf("friedman Q = %s (df = %d%s)\n", fixed4(stats.friedman.q).c_str(),
                    stats.friedman.df,
                    stats.friedman.approximate ? ", chi-square approximation" : "");
        for (const auto& [alpha, critical] : stats.friedman.critical_values) {
            std::printf("  alpha %.2f: critical value %s -> %s\n", alpha,
                        fixed4(critical).c_str(),
                        stats.friedman.reject_null.at(alpha) ? "reject equal-rank null"
                                                             : "cannot reject");
        }
    } else {
        std::printf("%s\n", stats.friedman_message.c_str());
    }
    const int k = static_cast<int>(stats.table.algorithms.size());
    const int n = static_cast<int>(stats.table.problems.size());
    std::printf("critical difference: %s (alpha 0.05), %s (alpha 0.01)\n",
                fixed4(evofis::bonferroni_dunn_cd(k, n, 0.05)).c_str(),
                fixed4(evofis::bonferroni_dunn_cd(k, n, 0.01)).c_str());
    std::printf("wrote %s and %s\n", stats.ranks_csv_path.string().c_str(),
                stats.cd_csv_path.string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"evofis: streaming evolving-fuzzy forecasting benchmark"};
    app.set_version_flag("--version", evofis::kVersion);
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a deterministic synthetic series");
    evofis::SynthConfig synth_cfg;
    std::string synth_output = "series.csv";
    synth->add_option("--kind", synth_cfg.kind,
                      "sine | two-cluster | drift | daily-profile")
        ->required();
    synth->add_option("--length", synth_cfg.length, "number of samples")->required();
    synth->add_option("--noise", synth_cfg.noise, "additive Gaussian noise stddev");
    synth->add_option("--seed", synth_cfg.seed, "noise RNG seed");
    synth->add_flag("--covariate", synth_cfg.covariate,
                    "daily-profile: add the temperature column");
    synth->add_option("--shift-every", synth_cfg.shift_every,
                      "drift: samples between mean shifts");
    synth->add_option("--output", synth_output, "CSV file to write");

    // run
    auto* run = app.add_subcommand("run", "run a benchmark config end to end");
    std::string run_config;
    std::string run_output;
    std::string run_format = "csv";
    bool run_freeze = false;
    run->add_option("--config", run_config, "experiment config JSON")->required();
    run->add_option("--output", run_output, "output directory (overrides config)");
    run->add_flag("--freeze", run_freeze, "disable adaptation during the test stream");
    run->add_option("--format", run_format, "stdout summary format")
        ->check(CLI::IsMember({"csv", "json"}));

    // stats
    auto* stats = app.add_subcommand("stats", "rank scores and run the Friedman test");
    std::string stats_scores;
    std::vector<std::string> stats_reports;
    std::string stats_output = "stats_out";
    std::string stats_format = "csv";
    auto* scores_opt =
        stats->add_option("--scores", stats_scores, "score matrix CSV (problem,<alg>,...)");
    stats->add_option("--reports", stats_reports,
                      "directories of report_*.json files (one per problem)")
        ->excludes(scores_opt);
    stats->add_option("--output", stats_output, "directory for ranks.csv / cd.csv");
    stats->add_option("--format", stats_format, "stdout format")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_cfg, synth_output);
        if (run->parsed()) return cmd_run(run_config, run_output, run_freeze, run_format);
        if (stats->parsed()) {
            if (stats_scores.empty() && stats_reports.empty())
                throw evofis::ConfigError("stats needs --scores or --reports");
            return cmd_stats(stats_scores, stats_reports, stats_output, stats_format);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
