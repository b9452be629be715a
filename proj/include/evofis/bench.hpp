#pragma once

#include "evofis/eval.hpp"
#include "evofis/timeseries.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace evofis {

struct AlgorithmSpec {
    std::string name;                     // ets | safis | mcfis
    nlohmann::json hyperparameters;       // object; omitted keys take defaults
};

/// One benchmark run: a data file streamed through every listed algorithm
/// under one window configuration. Relative data/output paths in a config
/// file resolve against the config file's directory.
struct ExperimentConfig {
    std::string problem = "P1";
    std::filesystem::path data_path;
    CsvSchema schema;
    WindowConfig window;
    std::vector<AlgorithmSpec> algorithms;
    std::uint32_t seed = 0;
    std::filesystem::path output_dir;
};

/// Parse and validate a config document. base_dir anchors relative paths
/// (pass the config file's parent directory). Unknown keys anywhere are
/// rejected so typos cannot silently fall back to defaults.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir);

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

struct RunArtifacts {
    std::vector<ExperimentReport> reports;
    std::vector<std::filesystem::path> report_paths;
    std::filesystem::path manifest_path;
};

/// Execute the full pipeline for every algorithm in the config: ingest,
/// fit the normalizer on the leak-free training prefix, normalize, window,
/// split, stream training pairs, then stream test pairs predict-then-learn
/// (prediction only when freeze is set). Scores are computed on the test
/// phase in the normalized domain. Writes per-algorithm report JSON,
/// predictions CSV and model-state JSON plus a run manifest into output_dir.
RunArtifacts run_experiment(const ExperimentConfig& cfg, bool freeze = false);

/// Scores indexed by problem (rows) and algorithm (columns), the input to
/// the ranking pipeline.
struct ScoreMatrix {
    std::vector<std::string> problems;
    std::vector<std::string> algorithms;
    Eigen::MatrixXd scores;
};

/// Parse a score matrix from CSV laid out as: header "problem,<alg>,..."
/// and one row per problem. Every cell must parse as a number.
ScoreMatrix score_matrix_from_csv(const csv::Table& table);

/// Collect a score matrix from report JSON files (as written by
/// run_experiment), using each report's rmse. A missing (problem,
/// algorithm) cell is an error naming the cell.
ScoreMatrix score_matrix_from_reports(const std::vector<std::filesystem::path>& report_files);

struct StatsArtifacts {
    RankTable table;
    bool friedman_ran = false;
    std::string friedman_message;   // set when the test was refused
    FriedmanOutcome friedman;
    std::filesystem::path ranks_csv_path;
    std::filesystem::path cd_csv_path;
};

/// Rank a score matrix, emit ranks.csv and cd.csv into output_dir, and run
/// the Friedman test when the matrix has at least two problems (otherwise
/// the outcome records why it was refused).
StatsArtifacts run_stats(const ScoreMatrix& matrix, const std::filesystem::path& output_dir);

nlohmann::json stats_to_json(const StatsArtifacts& stats);

/// FNV-1a 64-bit hash of a config document's canonical serialization, used
/// to stamp run manifests.
std::string config_hash(const nlohmann::json& config);

} // namespace evofis
