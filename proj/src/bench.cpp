#include "evofis/bench.hpp"

#include "evofis/errors.hpp"
#include "evofis/fuzzy.hpp"
#include "evofis/learner.hpp"
#include "evofis/version.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <utility>

namespace evofis {

namespace fs = std::filesystem;

namespace {

void check_object_keys(const nlohmann::json& j, const std::string& where,
                       const std::set<std::string>& valid) {
    if (!j.is_object())
        throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!valid.count(key)) {
            std::string known;
            for (const auto& k : valid) {
                if (!known.empty()) known += ", ";
                known += k;
            }
            throw ConfigError("unknown key \"" + key + "\" in " + where +
                              "; valid keys: " + known);
        }
    }
}

fs::path resolve(const fs::path& base_dir, const fs::path& path) {
    return path.is_relative() ? base_dir / path : path;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    out << content;
}

nlohmann::json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return j;
}

double parse_score_cell(const std::string& cell, const std::string& problem,
                        const std::string& algorithm) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(cell, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != cell.size() || !std::isfinite(value))
        throw StatsError("score matrix: cell for problem \"" + problem + "\", algorithm \"" +
                         algorithm + "\" is not a number: '" + cell + "'");
    return value;
}

// Unique artifact stem per algorithm entry; a second run of the same
// algorithm in one config gets a numeric suffix.
std::string artifact_stem(std::map<std::string, int>& seen, const std::string& problem,
                          const std::string& algorithm) {
    const int n = ++seen[algorithm];
    std::string stem = problem + "_" + algorithm;
    if (n > 1) stem += "_" + std::to_string(n);
    return stem;
}

} // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const fs::path& base_dir) {
    check_object_keys(j, "config",
                      {"problem", "data", "window", "algorithms", "seed", "output_dir"});
    ExperimentConfig cfg;
    if (j.contains("problem")) cfg.problem = j.at("problem").get<std::string>();

    if (!j.contains("data"))
        throw ConfigError("config is missing the \"data\" section");
    const auto& dj = j.at("data");
    check_object_keys(dj, "config.data",
                      {"path", "value_column", "timestamp_column", "exogenous_columns"});
    if (!dj.contains("path"))
        throw ConfigError("config.data is missing \"path\"");
    cfg.data_path = resolve(base_dir, fs::path(dj.at("path").get<std::string>()));
    if (dj.contains("value_column"))
        cfg.schema.value_column = dj.at("value_column").get<std::string>();
    if (dj.contains("timestamp_column"))
        cfg.schema.timestamp_column = dj.at("timestamp_column").get<std::string>();
    if (dj.contains("exogenous_columns"))
        cfg.schema.exogenous_columns =
            dj.at("exogenous_columns").get<std::vector<std::string>>();

    if (j.contains("window")) {
        const auto& wj = j.at("window");
        check_object_keys(wj, "config.window", {"nu", "mu", "gamma", "train_fraction"});
        if (wj.contains("nu")) cfg.window.nu = wj.at("nu").get<int>();
        if (wj.contains("mu")) cfg.window.mu = wj.at("mu").get<int>();
        if (wj.contains("gamma")) cfg.window.gamma = wj.at("gamma").get<int>();
        if (wj.contains("train_fraction"))
            cfg.window.train_fraction = wj.at("train_fraction").get<double>();
    }
    if (cfg.window.nu < 1) throw ConfigError("config.window.nu must be >= 1");
    if (cfg.window.mu < 0) throw ConfigError("config.window.mu must be >= 0");
    if (cfg.window.gamma < 1) throw ConfigError("config.window.gamma must be >= 1");
    if (!(cfg.window.train_fraction > 0.0) || !(cfg.window.train_fraction <= 1.0))
        throw ConfigError("config.window.train_fraction must lie in (0, 1], got " +
                          std::to_string(cfg.window.train_fraction));

    if (!j.contains("algorithms") || !j.at("algorithms").is_array() ||
        j.at("algorithms").empty())
        throw ConfigError("config needs a non-empty \"algorithms\" array");
    for (const auto& aj : j.at("algorithms")) {
        check_object_keys(aj, "config.algorithms[]", {"name", "hyperparameters"});
        AlgorithmSpec spec;
        if (!aj.contains("name"))
            throw ConfigError("config.algorithms[] entry is missing \"name\"");
        spec.name = aj.at("name").get<std::string>();
        spec.hyperparameters =
            aj.contains("hyperparameters") ? aj.at("hyperparameters") : nlohmann::json::object();
        // Constructing a learner validates both the name and every
        // hyperparameter key before any data is touched.
        make_learner(spec.name, spec.hyperparameters);
        cfg.algorithms.push_back(std::move(spec));
    }

    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint32_t>();
    cfg.output_dir = resolve(
        base_dir, j.contains("output_dir") ? fs::path(j.at("output_dir").get<std::string>())
                                           : fs::path("out"));
    return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
    const nlohmann::json j = read_json_file(path);
    try {
        return experiment_config_from_json(j, path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["problem"] = cfg.problem;
    j["data"] = {{"path", cfg.data_path.string()},
                 {"value_column", cfg.schema.value_column}};
    if (!cfg.schema.timestamp_column.empty())
        j["data"]["timestamp_column"] = cfg.schema.timestamp_column;
    if (!cfg.schema.exogenous_columns.empty())
        j["data"]["exogenous_columns"] = cfg.schema.exogenous_columns;
    j["window"] = {{"nu", cfg.window.nu},
                   {"mu", cfg.window.mu},
                   {"gamma", cfg.window.gamma},
                   {"train_fraction", cfg.window.train_fraction}};
    auto algs = nlohmann::json::array();
    for (const auto& spec : cfg.algorithms)
        algs.push_back({{"name", spec.name}, {"hyperparameters", spec.hyperparameters}});
    j["algorithms"] = std::move(algs);
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir.string();
    return j;
}

RunArtifacts run_experiment(const ExperimentConfig& cfg, bool freeze) {
    fs::create_directories(cfg.output_dir);

    const RawSeries raw = ingest_csv(cfg.data_path, cfg.schema);
    const std::size_t total_pairs = pair_count(raw.values.size(), cfg.window);
    if (total_pairs < 2)
        throw WindowError("series yields " + std::to_string(total_pairs) +
                          " regressor pairs; need at least 2 to split");
    const std::size_t n_train = train_pair_count(total_pairs, cfg.window.train_fraction);
    if (n_train == 0 || n_train >= total_pairs)
        throw SplitError("split would leave an empty partition (" + std::to_string(n_train) +
                         " train of " + std::to_string(total_pairs) + " pairs)");

    // The normalizer sees only raw samples that training pairs touch, so no
    // statistic of the test region can leak into the transform.
    const NormalizationParams params =
        fit_normalizer(raw, train_sample_count(cfg.window, n_train));
    const RawSeries normalized = normalize(raw, params);
    const std::vector<RegressorPair> pairs = build_pairs(normalized, cfg.window);
    const auto [train, test] = split_stream(pairs, cfg.window.train_fraction);

    RunArtifacts artifacts;
    nlohmann::json timing = nlohmann::json::object();
    std::map<std::string, int> stem_counts;

    for (const auto& spec : cfg.algorithms) {
        const auto started = std::chrono::steady_clock::now();
        auto learner = make_learner(spec.name, spec.hyperparameters);

        for (const auto& pair : train)
            learner->step(pair);
        learner->finish_training();
        if (freeze) learner->set_frozen(true);

        ExperimentReport report;
        report.algorithm = spec.name;
        report.problem = cfg.problem;
        report.predictions.reserve(test.size());
        for (const auto& pair : test) {
            Eigen::VectorXd predicted = learner->step(pair);
            report.predictions.emplace_back(pair.v, std::move(predicted));
        }

        std::vector<Eigen::VectorXd> actuals;
        std::vector<Eigen::VectorXd> predicted;
        actuals.reserve(test.size());
        predicted.reserve(test.size());
        for (const auto& [a, p] : report.predictions) {
            actuals.push_back(a);
            predicted.push_back(p);
        }
        report.rmse = rmse(actuals, predicted);
        report.ndei = ndei(actuals, predicted);
        report.final_rule_count = static_cast<int>(learner->rule_count());

        const auto elapsed = std::chrono::steady_clock::now() - started;
        const std::string stem = artifact_stem(stem_counts, cfg.problem, spec.name);

        const fs::path report_path = cfg.output_dir / ("report_" + stem + ".json");
        write_text_file(report_path, report_to_json(report).dump(2) + "\n");

        csv::Table preds;
        preds.header.push_back("index");
        for (int g = 1; g <= cfg.window.gamma; ++g)
            preds.header.push_back("actual_" + std::to_string(g));
        for (int g = 1; g <= cfg.window.gamma; ++g)
            preds.header.push_back("predicted_" + std::to_string(g));
        for (std::size_t i = 0; i < report.predictions.size(); ++i) {
            std::vector<std::string> row;
            row.push_back(std::to_string(i));
            const auto& [a, p] = report.predictions[i];
            for (Eigen::Index g = 0; g < a.size(); ++g)
                row.push_back(csv::format_double(a[g]));
            for (Eigen::Index g = 0; g < p.size(); ++g)
                row.push_back(csv::format_double(p[g]));
            preds.rows.push_back(std::move(row));
        }
        csv::write_file(cfg.output_dir / ("predictions_" + stem + ".csv"), preds);

        write_text_file(cfg.output_dir / ("model_" + stem + ".json"),
                        learner->state_json().dump(2) + "\n");

        timing[stem] =
            std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
        artifacts.reports.push_back(std::move(report));
        artifacts.report_paths.push_back(report_path);
    }

    nlohmann::json manifest;
    // The hash identifies what the experiment computes (data, window,
    // algorithms, seed); where the artifacts land is not part of that
    // identity, so two runs of one config into different directories
    // carry the same hash.
    nlohmann::json hashed = experiment_config_to_json(cfg);
    hashed.erase("output_dir");
    manifest["config_hash"] = config_hash(hashed);
    manifest["library_version"] = kVersion;
    manifest["freeze"] = freeze;
    auto files = nlohmann::json::array();
    for (const auto& path : artifacts.report_paths)
        files.push_back(path.filename().string());
    manifest["reports"] = std::move(files);
    manifest["timing_ms"] = std::move(timing);
    artifacts.manifest_path = cfg.output_dir / "manifest.json";
    write_text_file(artifacts.manifest_path, manifest.dump(2) + "\n");
    return artifacts;
}

ScoreMatrix score_matrix_from_csv(const csv::Table& table) {
    if (table.header.size() < 3 || table.header[0] != "problem")
        throw StatsError(
            "score matrix CSV needs a header \"problem,<algorithm>,...\" with at "
            "least two algorithm columns");
    ScoreMatrix matrix;
    matrix.algorithms.assign(table.header.begin() + 1, table.header.end());
    if (table.rows.empty())
        throw StatsError("score matrix CSV has no problem rows");
    matrix.scores.resize(static_cast<Eigen::Index>(table.rows.size()),
                         static_cast<Eigen::Index>(matrix.algorithms.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        matrix.problems.push_back(row[0]);
        for (std::size_t c = 1; c < row.size(); ++c)
            matrix.scores(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) =
                parse_score_cell(row[c], row[0], matrix.algorithms[c - 1]);
    }
    return matrix;
}

ScoreMatrix score_matrix_from_reports(const std::vector<fs::path>& report_files) {
    if (report_files.empty())
        throw StatsError("no report files given");
    std::map<std::pair<std::string, std::string>, double> cells;
    std::set<std::string> problem_set;
    std::set<std::string> algorithm_set;
    for (const auto& path : report_files) {
        ExperimentReport report;
        try {
            report = report_from_json(read_json_file(path));
        } catch (const nlohmann::json::exception& e) {
            throw StatsError(path.string() + ": " + e.what());
        }
        const auto key = std::make_pair(report.problem, report.algorithm);
        if (cells.count(key))
            throw StatsError("duplicate report for problem \"" + report.problem +
                             "\", algorithm \"" + report.algorithm + "\" (" + path.string() + ")");
        cells[key] = report.rmse;
        problem_set.insert(report.problem);
        algorithm_set.insert(report.algorithm);
    }

    ScoreMatrix matrix;
    matrix.problems.assign(problem_set.begin(), problem_set.end());
    matrix.algorithms.assign(algorithm_set.begin(), algorithm_set.end());
    matrix.scores.resize(static_cast<Eigen::Index>(matrix.problems.size()),
                         static_cast<Eigen::Index>(matrix.algorithms.size()));
    for (std::size_t r = 0; r < matrix.problems.size(); ++r) {
        for (std::size_t c = 0; c < matrix.algorithms.size(); ++c) {
            const auto it = cells.find({matrix.problems[r], matrix.algorithms[c]});
            if (it == cells.end())
                throw StatsError("score matrix incomplete: no report for problem \"" +
                                 matrix.problems[r] + "\", algorithm \"" + matrix.algorithms[c] +
                                 "\"");
            matrix.scores(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                it->second;
        }
    }
    return matrix;
}

StatsArtifacts run_stats(const ScoreMatrix& matrix, const fs::path& output_dir) {
    if (matrix.algorithms.size() < 2)
        throw StatsError("statistics need at least 2 algorithms, got " +
                         std::to_string(matrix.algorithms.size()));
    fs::create_directories(output_dir);

    StatsArtifacts stats;
    stats.table = rank_problems(matrix.problems, matrix.algorithms, matrix.scores);
    stats.ranks_csv_path = output_dir / "ranks.csv";
    csv::write_file(stats.ranks_csv_path, rank_table_csv(stats.table));
    stats.cd_csv_path = output_dir / "cd.csv";
    csv::write_file(stats.cd_csv_path, critical_difference_csv(stats.table));

    if (matrix.problems.size() >= 2) {
        stats.friedman = friedman(stats.table);
        stats.friedman_ran = true;
    } else {
        stats.friedman_message =
            "Friedman test requires at least 2 problems, got " +
            std::to_string(matrix.problems.size()) + "; test skipped";
    }
    return stats;
}

nlohmann::json stats_to_json(const StatsArtifacts& stats) {
    nlohmann::json j;
    j["problems"] = stats.table.problems;
    j["algorithms"] = stats.table.algorithms;
    j["ranks"] = matrix_to_json(stats.table.ranks);
    nlohmann::json avg = nlohmann::json::object();
    for (std::size_t c = 0; c < stats.table.algorithms.size(); ++c)
        avg[stats.table.algorithms[c]] = stats.table.average_ranks[static_cast<Eigen::Index>(c)];
    j["average_ranks"] = std::move(avg);

    const int k = static_cast<int>(stats.table.algorithms.size());
    const int n = static_cast<int>(stats.table.problems.size());
    j["critical_difference"] = {{"alpha_0.05", bonferroni_dunn_cd(k, n, 0.05)},
                                {"alpha_0.01", bonferroni_dunn_cd(k, n, 0.01)}};

    if (stats.friedman_ran) {
        nlohmann::json levels = nlohmann::json::array();
        for (const auto& [alpha, critical] : stats.friedman.critical_values) {
            levels.push_back({{"alpha", alpha},
                              {"critical_value", critical},
                              {"reject_null", stats.friedman.reject_null.at(alpha)}});
        }
        j["friedman"] = {{"q", stats.friedman.q},
                         {"df", stats.friedman.df},
                         {"approximate", stats.friedman.approximate},
                         {"levels", std::move(levels)}};
    } else {
        j["friedman"] = nullptr;
        j["message"] = stats.friedman_message;
    }
    return j;
}

std::string config_hash(const nlohmann::json& config) {
    const std::string text = config.dump();
    std::uint64_t hash = 1469598103934665603ull;
    for (const unsigned char byte : text) {
        hash ^= byte;
        hash *= 1099511628211ull;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[hash & 0xF];
        hash >>= 4;
    }
    return out;
}

} // namespace evofis
