#pragma once

#include "evofis/csv.hpp"

#include <Eigen/Core>

#include <json.hpp>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace evofis {

/// Root mean squared error over samples and output coordinates.
double rmse(const std::vector<Eigen::VectorXd>& actuals,
            const std::vector<Eigen::VectorXd>& predictions);

/// RMSE divided by the population standard deviation (divisor N) of the
/// flattened actuals. A constant-mean predictor scores exactly 1.
double ndei(const std::vector<Eigen::VectorXd>& actuals,
            const std::vector<Eigen::VectorXd>& predictions);

/// Per-problem ranks of the competing algorithms (1 = best) with tied scores
/// receiving averaged ranks, plus the per-algorithm column means.
struct RankTable {
    std::vector<std::string> problems;
    std::vector<std::string> algorithms;
    Eigen::MatrixXd ranks;         // problems x algorithms
    Eigen::VectorXd average_ranks; // per algorithm
};

/// Rank a complete score matrix (problems x algorithms). With
/// lower_is_better (the default, suiting error metrics) the smallest score
/// gets rank 1. Any non-finite cell makes the matrix incomplete.
RankTable rank_problems(const std::vector<std::string>& problems,
                        const std::vector<std::string>& algorithms,
                        const Eigen::MatrixXd& scores, bool lower_is_better = true);

/// Friedman rank test outcome. Keys of critical_values / reject_null are the
/// supported significance levels 0.05 and 0.01. approximate is set when the
/// critical values come from the chi-square approximation rather than the
/// exact small-sample distribution.
struct FriedmanOutcome {
    double q = 0.0;
    int df = 0;
    bool approximate = false;
    std::map<double, double> critical_values;
    std::map<double, bool> reject_null;
};

/// Friedman test over a rank table with at least 2 problems and 2
/// algorithms. Exact critical values are built in for the 3-algorithm,
/// 6-problem shape; other shapes use the chi-square approximation with k-1
/// degrees of freedom and are flagged approximate.
FriedmanOutcome friedman(const RankTable& table);

/// Bonferroni-Dunn critical difference q_a * sqrt(k(k+1)/(6N)) with q_a the
/// two-sided normal quantile at alpha/(k-1). alpha must be 0.05 or 0.01.
double bonferroni_dunn_cd(int k, int n, double alpha);

/// Inverse standard-normal CDF (Acklam's rational approximation plus one
/// Halley refinement). Exposed for verification.
double normal_quantile(double p);

/// One algorithm's scored run on one problem. The rmse field is always
/// recomputable from the stored prediction pairs.
struct ExperimentReport {
    std::string algorithm;
    std::string problem;
    double rmse = 0.0;
    double ndei = 0.0;
    int final_rule_count = 0;
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> predictions; // (actual, predicted)
};

nlohmann::json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

/// Rank table as CSV: one row per problem plus a final avg_rank row.
csv::Table rank_table_csv(const RankTable& table);

/// Post-hoc comparison table against the top-ranked algorithm: average
/// ranks, rank differences, and whether each difference exceeds the
/// Bonferroni-Dunn critical difference at 0.05 and 0.01.
csv::Table critical_difference_csv(const RankTable& table);

} // namespace evofis
