#include "evofis/errors.hpp"
#include "evofis/eval.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace evofis;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::vector<VectorXd> scalars(std::initializer_list<double> xs) {
    std::vector<VectorXd> out;
    for (double x : xs) out.push_back(VectorXd::Constant(1, x));
    return out;
}

// The six-problem, three-algorithm benchmark fixture used throughout the
// statistics tests: per-problem errors for ets / safis / mcfis.
MatrixXd fixture_scores() {
    MatrixXd scores(6, 3);
    scores << 0.1558, 0.2291, 0.1555, //
        0.2094, 0.2947, 0.1657,       //
        0.1019, 0.1174, 0.0964,       //
        0.1334, 0.1496, 0.1328,       //
        0.0909, 0.0976, 0.0867,       //
        0.1365, 0.1239, 0.1221;
    return scores;
}

const std::vector<std::string> kProblems{"F1", "F2", "F3", "F4", "F5", "F6"};
const std::vector<std::string> kAlgorithms{"ets", "safis", "mcfis"};

} // namespace

TEST_SUITE_BEGIN("eval");

TEST_CASE("rmse on opposing unit errors is one") {
    CHECK(rmse(scalars({1.0, 0.0}), scalars({0.0, 1.0})) == doctest::Approx(1.0));
    CHECK(rmse(scalars({1.0, 2.0, 3.0}), scalars({1.0, 2.0, 3.0})) == doctest::Approx(0.0));
}

TEST_CASE("rmse averages over samples and output coordinates") {
    std::vector<VectorXd> actuals, predictions;
    VectorXd a(2), p(2);
    a << 1.0, 2.0;
    p << 2.0, 2.0; // one coordinate off by 1
    actuals.push_back(a);
    predictions.push_back(p);
    CHECK(rmse(actuals, predictions) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("rmse recomputation from stored pairs is exact") {
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<VectorXd> actuals, predictions;
    for (int i = 0; i < 100; ++i) {
        actuals.push_back(VectorXd::Constant(1, unit(rng)));
        predictions.push_back(VectorXd::Constant(1, unit(rng)));
    }
    const double once = rmse(actuals, predictions);
    const double twice = rmse(actuals, predictions);
    CHECK(once == twice);
    double sum = 0.0;
    for (int i = 0; i < 100; ++i) sum += std::pow(actuals[static_cast<std::size_t>(i)][0] -
                                                  predictions[static_cast<std::size_t>(i)][0], 2);
    CHECK(once == doctest::Approx(std::sqrt(sum / 100.0)).epsilon(1e-12));
}

TEST_CASE("rmse rejects empty or mismatched inputs") {
    CHECK_THROWS_AS(rmse({}, {}), StatsError);
    CHECK_THROWS_AS(rmse(scalars({1.0}), scalars({1.0, 2.0})), StatsError);
}

TEST_CASE("a mean predictor scores NDEI of exactly one") {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<VectorXd> actuals;
    double mean = 0.0;
    for (int i = 0; i < 500; ++i) {
        actuals.push_back(VectorXd::Constant(1, unit(rng)));
        mean += actuals.back()[0];
    }
    mean /= 500.0;
    const std::vector<VectorXd> predictions(500, VectorXd::Constant(1, mean));
    CHECK(std::abs(ndei(actuals, predictions) - 1.0) <= 1e-12);
}

TEST_CASE("a perfect predictor scores NDEI of zero") {
    const auto actuals = scalars({0.2, 0.4, 0.9, 0.1});
    CHECK(ndei(actuals, actuals) == doctest::Approx(0.0));
}

TEST_CASE("NDEI is RMSE over the spread of the actuals") {
    // Published single-problem anchor: error 0.1555 against NDEI 0.5878
    // implies a target spread near 0.2645; the two stay consistent here.
    const double implied_sigma = 0.1555 / 0.5878;
    std::vector<VectorXd> actuals, predictions;
    // Two-point actuals with population sd exactly implied_sigma.
    actuals.push_back(VectorXd::Constant(1, 0.0));
    actuals.push_back(VectorXd::Constant(1, 2.0 * implied_sigma));
    predictions.push_back(VectorXd::Constant(1, 0.1555));
    predictions.push_back(VectorXd::Constant(1, 2.0 * implied_sigma + 0.1555));
    CHECK(rmse(actuals, predictions) == doctest::Approx(0.1555));
    CHECK(ndei(actuals, predictions) == doctest::Approx(0.5878).epsilon(5e-4));
}

TEST_CASE("NDEI refuses degenerate actuals") {
    CHECK_THROWS_AS(ndei(scalars({0.5}), scalars({0.5})), StatsError);
    CHECK_THROWS_AS(ndei(scalars({0.5, 0.5, 0.5}), scalars({0.1, 0.2, 0.3})), StatsError);
}

TEST_CASE("ranking the benchmark fixture reproduces the expected averages") {
    const auto table = rank_problems(kProblems, kAlgorithms, fixture_scores());
    CHECK(table.average_ranks[0] == doctest::Approx(13.0 / 6.0).epsilon(0.01)); // 2.17
    CHECK(table.average_ranks[1] == doctest::Approx(17.0 / 6.0).epsilon(0.01)); // 2.83
    CHECK(table.average_ranks[2] == doctest::Approx(1.0));                      // best on all six
}

TEST_CASE("ranks order a single problem correctly") {
    MatrixXd scores(1, 3);
    scores << 0.3, 0.1, 0.2;
    const auto table = rank_problems({"P"}, {"a", "b", "c"}, scores);
    CHECK(table.ranks(0, 0) == doctest::Approx(3.0));
    CHECK(table.ranks(0, 1) == doctest::Approx(1.0));
    CHECK(table.ranks(0, 2) == doctest::Approx(2.0));
}

TEST_CASE("higher-is-better flips the ordering") {
    MatrixXd scores(1, 3);
    scores << 0.3, 0.1, 0.2;
    const auto table = rank_problems({"P"}, {"a", "b", "c"}, scores, false);
    CHECK(table.ranks(0, 0) == doctest::Approx(1.0));
    CHECK(table.ranks(0, 1) == doctest::Approx(3.0));
}

TEST_CASE("tied scores share an averaged rank") {
    MatrixXd scores(1, 3);
    scores << 0.1, 0.1, 0.2;
    const auto table = rank_problems({"P"}, {"a", "b", "c"}, scores);
    CHECK(table.ranks(0, 0) == doctest::Approx(1.5));
    CHECK(table.ranks(0, 1) == doctest::Approx(1.5));
    CHECK(table.ranks(0, 2) == doctest::Approx(3.0));
}

TEST_CASE("each problem's ranks always average to (k+1)/2") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    MatrixXd scores = MatrixXd::NullaryExpr(8, 4, [&] { return unit(rng); });
    const auto table = rank_problems({"a", "b", "c", "d", "e", "f", "g", "h"},
                                     {"w", "x", "y", "z"}, scores);
    for (int p = 0; p < 8; ++p)
        CHECK(table.ranks.row(p).mean() == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("an incomplete score matrix is rejected by name") {
    MatrixXd scores = fixture_scores();
    scores(2, 1) = std::nan("");
    CHECK_THROWS_WITH_AS(rank_problems(kProblems, kAlgorithms, scores),
                         doctest::Contains("F3"), StatsError);
    CHECK_THROWS_AS(rank_problems({}, kAlgorithms, MatrixXd(0, 3)), StatsError);
    CHECK_THROWS_AS(rank_problems(kProblems, kAlgorithms, MatrixXd(6, 2)), StatsError);
}

TEST_CASE("the Friedman statistic on the fixture matches the rank sums") {
    const auto table = rank_problems(kProblems, kAlgorithms, fixture_scores());
    const auto outcome = friedman(table);
    // Rank sums 13, 17, 6 give Q = 12/(6*3*4) * (169+289+36) - 3*6*4 = 10.333...
    CHECK(outcome.q == doctest::Approx(10.3333).epsilon(1e-3));
    CHECK(outcome.q > 10.30);
    CHECK(outcome.q < 10.34);
    CHECK(outcome.df == 2);
    CHECK(!outcome.approximate); // exact table for 3 algorithms on 6 problems
    CHECK(outcome.critical_values.at(0.05) == doctest::Approx(7.0));
    CHECK(outcome.critical_values.at(0.01) == doctest::Approx(9.0));
    CHECK(outcome.reject_null.at(0.05));
    CHECK(outcome.reject_null.at(0.01));
}

TEST_CASE("identical algorithms give Q of zero and no rejection") {
    MatrixXd scores(6, 3);
    for (int p = 0; p < 6; ++p) scores.row(p) << 0.1 * (p + 1), 0.1 * (p + 1), 0.1 * (p + 1);
    const auto table = rank_problems(kProblems, kAlgorithms, scores);
    const auto outcome = friedman(table);
    CHECK(outcome.q == doctest::Approx(0.0));
    CHECK(!outcome.reject_null.at(0.05));
    CHECK(!outcome.reject_null.at(0.01));
}

TEST_CASE("Friedman depends only on score order, not scale") {
    const MatrixXd scores = fixture_scores();
    MatrixXd warped = scores;
    for (int p = 0; p < warped.rows(); ++p)
        for (int a = 0; a < warped.cols(); ++a) warped(p, a) = std::exp(5.0 * warped(p, a));
    const auto q1 = friedman(rank_problems(kProblems, kAlgorithms, scores)).q;
    const auto q2 = friedman(rank_problems(kProblems, kAlgorithms, warped)).q;
    CHECK(q1 == doctest::Approx(q2).epsilon(1e-12));
}

TEST_CASE("other shapes fall back to the flagged chi-square approximation") {
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    MatrixXd scores = MatrixXd::NullaryExpr(10, 4, [&] { return unit(rng); });
    std::vector<std::string> problems;
    for (int p = 0; p < 10; ++p) problems.push_back("P" + std::to_string(p));
    const auto outcome = friedman(rank_problems(problems, {"w", "x", "y", "z"}, scores));
    CHECK(outcome.approximate);
    CHECK(outcome.df == 3);
    // Chi-square(3) upper tail: the 1% cutoff must exceed the 5% cutoff.
    CHECK(outcome.critical_values.at(0.01) > outcome.critical_values.at(0.05));
    CHECK(outcome.critical_values.at(0.05) == doctest::Approx(7.815).epsilon(0.02));
}

TEST_CASE("Friedman needs at least two problems and two algorithms") {
    MatrixXd one_row(1, 3);
    one_row << 0.1, 0.2, 0.3;
    CHECK_THROWS_AS(friedman(rank_problems({"P"}, kAlgorithms, one_row)), StatsError);
}

TEST_CASE("the critical difference matches the published constant") {
    CHECK(bonferroni_dunn_cd(3, 6, 0.05) == doctest::Approx(1.294).epsilon(0.005 / 1.294));
    CHECK(bonferroni_dunn_cd(3, 6, 0.01) > bonferroni_dunn_cd(3, 6, 0.05));
}

TEST_CASE("the normal quantile hits the two-sided anchors") {
    // Two-sided alpha/(k-1) quantiles for three algorithms.
    CHECK(std::abs(normal_quantile(1.0 - 0.05 / 4.0) - 2.2414) <= 5e-5);
    CHECK(std::abs(normal_quantile(1.0 - 0.01 / 4.0) - 2.8070) <= 5e-5);
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-5));
    CHECK(normal_quantile(0.2) == doctest::Approx(-normal_quantile(0.8)).epsilon(1e-12));
}

TEST_CASE("the critical difference shrinks with more problems") {
    CHECK(bonferroni_dunn_cd(2, 1000, 0.05) < 0.2);
    CHECK(bonferroni_dunn_cd(3, 6, 0.05) > bonferroni_dunn_cd(3, 60, 0.05));
}

TEST_CASE("unsupported significance levels are refused") {
    CHECK_THROWS_AS(bonferroni_dunn_cd(3, 6, 0.1), StatsError);
    CHECK_THROWS_AS(bonferroni_dunn_cd(1, 6, 0.05), StatsError);
    CHECK_THROWS_AS(normal_quantile(0.0), StatsError);
    CHECK_THROWS_AS(normal_quantile(1.0), StatsError);
}

TEST_CASE("experiment reports round-trip through JSON with recomputable error") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ExperimentReport report;
    report.algorithm = "mcfis";
    report.problem = "F1";
    report.final_rule_count = 7;
    std::vector<VectorXd> actuals, predictions;
    for (int i = 0; i < 60; ++i) {
        VectorXd a = VectorXd::Constant(1, unit(rng));
        VectorXd p = VectorXd::Constant(1, unit(rng));
        report.predictions.emplace_back(a, p);
        actuals.push_back(a);
        predictions.push_back(p);
    }
    report.rmse = rmse(actuals, predictions);
    report.ndei = ndei(actuals, predictions);

    const auto again = report_from_json(report_to_json(report));
    CHECK(again.algorithm == report.algorithm);
    CHECK(again.problem == report.problem);
    CHECK(again.rmse == report.rmse);
    CHECK(again.ndei == report.ndei);
    CHECK(again.final_rule_count == report.final_rule_count);
    REQUIRE(again.predictions.size() == report.predictions.size());

    std::vector<VectorXd> a2, p2;
    for (const auto& [a, p] : again.predictions) {
        a2.push_back(a);
        p2.push_back(p);
    }
    CHECK(rmse(a2, p2) == doctest::Approx(report.rmse).epsilon(1e-12));
}

TEST_CASE("the rank table CSV carries one row per problem plus the averages") {
    const auto table = rank_problems(kProblems, kAlgorithms, fixture_scores());
    const auto out = rank_table_csv(table);
    REQUIRE(out.header.size() == 4);
    CHECK(out.header[0] == "problem");
    CHECK(out.header[2] == "safis");
    REQUIRE(out.rows.size() == 7);
    CHECK(out.rows[0][0] == "F1");
    CHECK(out.rows[6][0] == "avg_rank");
    CHECK(out.rows[6][3] == "1.00"); // mcfis wins every problem
}

TEST_CASE("the critical-difference CSV compares everyone to the leader") {
    const auto table = rank_problems(kProblems, kAlgorithms, fixture_scores());
    const auto out = critical_difference_csv(table);
    REQUIRE(out.rows.size() == 3);
    // Leader row: mcfis with zero difference, never beyond the cutoff.
    bool found_leader = false;
    for (const auto& row : out.rows) {
        if (row[0] != "mcfis") continue;
        found_leader = true;
        CHECK(std::stod(row[2]) == doctest::Approx(0.0));
        CHECK(row[5] == "no");
        CHECK(row[6] == "no");
    }
    CHECK(found_leader);
    // safis trails mcfis by 1.83 > 1.294, so it is beyond the 5% cutoff.
    for (const auto& row : out.rows) {
        if (row[0] != "safis") continue;
        CHECK(std::stod(row[2]) == doctest::Approx(11.0 / 6.0).epsilon(1e-3));
        CHECK(row[5] == "yes");
    }
}

TEST_SUITE_END();
