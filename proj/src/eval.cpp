#include "evofis/eval.hpp"

#include "evofis/errors.hpp"
#include "evofis/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

namespace evofis {

namespace {

void check_paired(const std::vector<Eigen::VectorXd>& actuals,
                  const std::vector<Eigen::VectorXd>& predictions) {
    if (actuals.empty())
        throw StatsError("scoring requires at least one sample");
    if (actuals.size() != predictions.size())
        throw StatsError("actuals (" + std::to_string(actuals.size()) + ") and predictions (" +
                         std::to_string(predictions.size()) + ") differ in length");
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        if (actuals[i].size() != predictions[i].size())
            throw StatsError("sample " + std::to_string(i) +
                             ": actual and predicted dimensions differ");
    }
}

std::string format_fixed(double value, int decimals) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(decimals);
    out << value;
    return out.str();
}

// Two-sided normal quantile for the Bonferroni-corrected level alpha/(k-1).
double two_sided_quantile(int k, double alpha) {
    return normal_quantile(1.0 - alpha / (2.0 * (k - 1)));
}

bool is_level(double alpha, double level) {
    return std::abs(alpha - level) < 1e-12;
}

} // namespace

double rmse(const std::vector<Eigen::VectorXd>& actuals,
            const std::vector<Eigen::VectorXd>& predictions) {
    check_paired(actuals, predictions);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        sum += (actuals[i] - predictions[i]).squaredNorm();
        count += static_cast<std::size_t>(actuals[i].size());
    }
    if (count == 0)
        throw StatsError("scoring requires non-empty sample vectors");
    return std::sqrt(sum / static_cast<double>(count));
}

double ndei(const std::vector<Eigen::VectorXd>& actuals,
            const std::vector<Eigen::VectorXd>& predictions) {
    check_paired(actuals, predictions);
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& a : actuals) {
        sum += a.sum();
        count += static_cast<std::size_t>(a.size());
    }
    if (count < 2)
        throw StatsError("NDEI requires at least two target values");
    const double mean = sum / static_cast<double>(count);
    double var = 0.0;
    for (const auto& a : actuals)
        var += (a.array() - mean).square().sum();
    var /= static_cast<double>(count);
    if (var <= 0.0)
        throw StatsError("NDEI is undefined for constant actuals");
    return rmse(actuals, predictions) / std::sqrt(var);
}

RankTable rank_problems(const std::vector<std::string>& problems,
                        const std::vector<std::string>& algorithms,
                        const Eigen::MatrixXd& scores, bool lower_is_better) {
    const auto n = static_cast<Eigen::Index>(problems.size());
    const auto k = static_cast<Eigen::Index>(algorithms.size());
    if (n == 0 || k == 0)
        throw StatsError("ranking requires at least one problem and one algorithm");
    if (scores.rows() != n || scores.cols() != k)
        throw StatsError("score matrix is " + std::to_string(scores.rows()) + "x" +
                         std::to_string(scores.cols()) + ", expected " + std::to_string(n) + "x" +
                         std::to_string(k));
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < k; ++c) {
            if (!std::isfinite(scores(r, c)))
                throw StatsError("score matrix incomplete: problem \"" +
                                 problems[static_cast<std::size_t>(r)] + "\", algorithm \"" +
                                 algorithms[static_cast<std::size_t>(c)] + "\"");
        }
    }

    RankTable table;
    table.problems = problems;
    table.algorithms = algorithms;
    table.ranks.resize(n, k);
    for (Eigen::Index r = 0; r < n; ++r) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return lower_is_better ? scores(r, a) < scores(r, b) : scores(r, a) > scores(r, b);
        });
        // Walk runs of equal scores and hand every member the averaged rank.
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j + 1 < order.size() &&
                   scores(r, order[j + 1]) == scores(r, order[i]))
                ++j;
            const double averaged = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
            for (std::size_t t = i; t <= j; ++t)
                table.ranks(r, order[t]) = averaged;
            i = j + 1;
        }
    }
    table.average_ranks = table.ranks.colwise().mean();
    return table;
}

FriedmanOutcome friedman(const RankTable& table) {
    const Eigen::Index n = table.ranks.rows();
    const Eigen::Index k = table.ranks.cols();
    if (n < 2)
        throw StatsError("Friedman test requires at least 2 problems, got " + std::to_string(n));
    if (k < 2)
        throw StatsError("Friedman test requires at least 2 algorithms, got " + std::to_string(k));

    const Eigen::VectorXd rank_sums = table.ranks.colwise().sum();
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    FriedmanOutcome outcome;
    outcome.q = 12.0 / (nd * kd * (kd + 1.0)) * rank_sums.squaredNorm() - 3.0 * nd * (kd + 1.0);
    outcome.df = static_cast<int>(k) - 1;

    if (k == 3 && n == 6) {
        // Exact small-sample critical values for this table shape.
        outcome.approximate = false;
        outcome.critical_values[0.05] = 7.0;
        outcome.critical_values[0.01] = 9.0;
    } else {
        // Wilson-Hilferty chi-square quantile, flagged as an approximation.
        outcome.approximate = true;
        const double df = static_cast<double>(outcome.df);
        for (double alpha : {0.05, 0.01}) {
            const double z = normal_quantile(1.0 - alpha);
            const double cube = 1.0 - 2.0 / (9.0 * df) + z * std::sqrt(2.0 / (9.0 * df));
            outcome.critical_values[alpha] = df * cube * cube * cube;
        }
    }
    for (const auto& [alpha, critical] : outcome.critical_values)
        outcome.reject_null[alpha] = outcome.q > critical;
    return outcome;
}

double bonferroni_dunn_cd(int k, int n, double alpha) {
    if (k < 2 || n < 1)
        throw StatsError("critical difference requires k >= 2 algorithms and n >= 1 problems");
    if (!is_level(alpha, 0.05) && !is_level(alpha, 0.01))
        throw StatsError("unsupported significance level " + std::to_string(alpha) +
                         "; supported levels are 0.05 and 0.01");
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    return two_sided_quantile(k, alpha) * std::sqrt(kd * (kd + 1.0) / (6.0 * nd));
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw StatsError("normal quantile requires p in (0, 1)");

    // Acklam's rational approximation, |relative error| < 1.15e-9.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Halley refinement against the exact CDF brings the result to
    // near machine precision.
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

nlohmann::json report_to_json(const ExperimentReport& report) {
    nlohmann::json j;
    j["algorithm"] = report.algorithm;
    j["problem"] = report.problem;
    j["rmse"] = report.rmse;
    j["ndei"] = report.ndei;
    j["final_rule_count"] = report.final_rule_count;
    auto preds = nlohmann::json::array();
    for (const auto& [actual, predicted] : report.predictions) {
        preds.push_back(
            {{"actual", vector_to_json(actual)}, {"predicted", vector_to_json(predicted)}});
    }
    j["predictions"] = std::move(preds);
    return j;
}

ExperimentReport report_from_json(const nlohmann::json& j) {
    ExperimentReport report;
    report.algorithm = j.at("algorithm").get<std::string>();
    report.problem = j.at("problem").get<std::string>();
    report.rmse = j.at("rmse").get<double>();
    report.ndei = j.at("ndei").get<double>();
    report.final_rule_count = j.at("final_rule_count").get<int>();
    for (const auto& p : j.at("predictions")) {
        report.predictions.emplace_back(vector_from_json(p.at("actual")),
                                        vector_from_json(p.at("predicted")));
    }
    return report;
}

csv::Table rank_table_csv(const RankTable& table) {
    csv::Table out;
    out.header.push_back("problem");
    for (const auto& algorithm : table.algorithms)
        out.header.push_back(algorithm);
    for (Eigen::Index r = 0; r < table.ranks.rows(); ++r) {
        std::vector<std::string> row;
        row.push_back(table.problems[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < table.ranks.cols(); ++c)
            row.push_back(format_fixed(table.ranks(r, c), 2));
        out.rows.push_back(std::move(row));
    }
    std::vector<std::string> avg_row;
    avg_row.push_back("avg_rank");
    for (Eigen::Index c = 0; c < table.average_ranks.size(); ++c)
        avg_row.push_back(format_fixed(table.average_ranks[c], 2));
    out.rows.push_back(std::move(avg_row));
    return out;
}

csv::Table critical_difference_csv(const RankTable& table) {
    const int k = static_cast<int>(table.algorithms.size());
    const int n = static_cast<int>(table.problems.size());
    Eigen::Index best = 0;
    table.average_ranks.minCoeff(&best);
    const double cd05 = bonferroni_dunn_cd(k, n, 0.05);
    const double cd01 = bonferroni_dunn_cd(k, n, 0.01);

    csv::Table out;
    out.header = {"algorithm",     "avg_rank",      "diff_vs_best",
                  "cd_alpha_0.05", "cd_alpha_0.01", "beyond_cd_0.05",
                  "beyond_cd_0.01"};
    for (Eigen::Index c = 0; c < table.average_ranks.size(); ++c) {
        const double diff = table.average_ranks[c] - table.average_ranks[best];
        out.rows.push_back({table.algorithms[static_cast<std::size_t>(c)],
                            format_fixed(table.average_ranks[c], 4), format_fixed(diff, 4),
                            format_fixed(cd05, 4), format_fixed(cd01, 4),
                            diff > cd05 ? "yes" : "no", diff > cd01 ? "yes" : "no"});
    }
    return out;
}

} // namespace evofis
