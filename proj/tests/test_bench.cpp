#include "evofis/bench.hpp"
#include "evofis/errors.hpp"
#include "evofis/learner.hpp"
#include "evofis/synth.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

using namespace evofis;
namespace fs = std::filesystem;

namespace {

// Self-cleaning scratch directory for one test case.
struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("evofis_bench_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
};

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// A daily-profile data file plus a config running all three learners on it.
ExperimentConfig small_experiment(const TempDir& dir, int length = 400) {
    SynthConfig synth;
    synth.kind = "daily-profile";
    synth.length = length;
    synth.noise = 0.02;
    synth.seed = 7;
    const RawSeries series = generate_series(synth);
    write_series_csv(dir.path / "series.csv", series);

    ExperimentConfig cfg;
    cfg.problem = "P1";
    cfg.data_path = dir.path / "series.csv";
    cfg.schema.timestamp_column = "timestamp";
    cfg.schema.value_column = "load";
    cfg.window.nu = 4;
    cfg.window.gamma = 1;
    cfg.window.train_fraction = 0.85;
    cfg.algorithms = {{"ets", nlohmann::json::object()},
                      {"safis", nlohmann::json::object()},
                      {"mcfis", nlohmann::json::object()}};
    cfg.output_dir = dir.path / "out";
    return cfg;
}

nlohmann::json minimal_config_json() {
    return nlohmann::json{
        {"problem", "P1"},
        {"data", {{"path", "series.csv"}, {"value_column", "load"}}},
        {"window", {{"nu", 4}, {"gamma", 1}, {"train_fraction", 0.85}}},
        {"algorithms", nlohmann::json::array({nlohmann::json{{"name", "ets"}}})},
    };
}

} // namespace

TEST_SUITE_BEGIN("bench");

TEST_CASE("config parsing resolves relative paths against the config directory") {
    const auto cfg = experiment_config_from_json(minimal_config_json(), "/srv/configs");
    CHECK(cfg.data_path == fs::path("/srv/configs/series.csv"));
    CHECK(cfg.output_dir == fs::path("/srv/configs/out"));
    CHECK(cfg.problem == "P1");
    CHECK(cfg.window.nu == 4);
    REQUIRE(cfg.algorithms.size() == 1);
    CHECK(cfg.algorithms[0].name == "ets");
}

TEST_CASE("config parsing rejects unknown keys at every level") {
    auto top = minimal_config_json();
    top["colour"] = "red";
    CHECK_THROWS_WITH_AS(experiment_config_from_json(top, "."), doctest::Contains("colour"),
                         ConfigError);

    auto data = minimal_config_json();
    data["data"]["sep"] = ";";
    CHECK_THROWS_AS(experiment_config_from_json(data, "."), ConfigError);

    auto window = minimal_config_json();
    window["window"]["lookback"] = 4;
    CHECK_THROWS_WITH_AS(experiment_config_from_json(window, "."),
                         doctest::Contains("lookback"), ConfigError);

    auto algo = minimal_config_json();
    algo["algorithms"][0]["hyper"] = nlohmann::json::object();
    CHECK_THROWS_AS(experiment_config_from_json(algo, "."), ConfigError);
}

TEST_CASE("config parsing rejects bad window bounds and unknown algorithms") {
    auto bad_nu = minimal_config_json();
    bad_nu["window"]["nu"] = 0;
    CHECK_THROWS_WITH_AS(experiment_config_from_json(bad_nu, "."), doctest::Contains("nu"),
                         ConfigError);

    auto bad_fraction = minimal_config_json();
    bad_fraction["window"]["train_fraction"] = 1.5;
    CHECK_THROWS_AS(experiment_config_from_json(bad_fraction, "."), ConfigError);

    auto bad_algo = minimal_config_json();
    bad_algo["algorithms"][0]["name"] = "mystery";
    CHECK_THROWS_AS(experiment_config_from_json(bad_algo, "."), ConfigError);

    auto bad_hyper = minimal_config_json();
    bad_hyper["algorithms"][0]["hyperparameters"] = {{"radios", 0.3}};
    CHECK_THROWS_WITH_AS(experiment_config_from_json(bad_hyper, "."),
                         doctest::Contains("radios"), ConfigError);
}

TEST_CASE("config serialization round-trips") {
    const auto cfg = experiment_config_from_json(minimal_config_json(), "/srv/configs");
    const auto j = experiment_config_to_json(cfg);
    const auto again = experiment_config_from_json(j, "/elsewhere");
    CHECK(again.problem == cfg.problem);
    CHECK(again.data_path == cfg.data_path); // absolute now: base_dir is moot
    CHECK(again.window.train_fraction == cfg.window.train_fraction);
    CHECK(again.algorithms.size() == cfg.algorithms.size());
}

TEST_CASE("the learner factory refuses unknown names and parameters") {
    CHECK_NOTHROW(make_learner("ets", {}));
    CHECK_NOTHROW(make_learner("safis", {{"kappa", 1.0}}));
    CHECK_NOTHROW(make_learner("mcfis", {{"e_add", 0.4}}));
    CHECK_THROWS_WITH_AS(make_learner("anfis", {}), doctest::Contains("expected"), ConfigError);
    CHECK_THROWS_WITH_AS(make_learner("ets", {{"radius", 0.3}, {"omega2", 1.0}}),
                         doctest::Contains("omega2"), ConfigError);
}

TEST_CASE("learners predict zeros before their first sample and report their names") {
    for (const std::string name : {"ets", "safis", "mcfis"}) {
        const auto learner = make_learner(name, {});
        CHECK(learner->name() == name);
        CHECK(learner->rule_count() == 0);
        const auto j = learner->state_json();
        CHECK(j.at("algorithm") == name);
        CHECK(j.at("initialized") == false);
    }
}

TEST_CASE("the learner facade streams predict-then-learn") {
    // Constant mapping, then a flipped target: the flip step must still
    // report the old mapping's prediction for every algorithm.
    for (const std::string name : {"ets", "safis", "mcfis"}) {
        CAPTURE(name);
        const auto learner = make_learner(name, {});
        RegressorPair pair;
        pair.u = Eigen::VectorXd::Constant(2, 0.5);
        pair.v = Eigen::VectorXd::Constant(1, 0.3);
        Eigen::VectorXd last;
        for (int t = 0; t < 60; ++t) {
            pair.origin_index = t;
            last = learner->step(pair);
        }
        CHECK(last[0] == doctest::Approx(0.3).epsilon(1e-3));

        pair.v[0] = 0.9;
        pair.origin_index = 60;
        const auto at_flip = learner->step(pair);
        CHECK(at_flip[0] == doctest::Approx(0.3).epsilon(1e-2));
        CHECK(learner->rule_count() >= 1);
    }
}

TEST_CASE("frozen learners stop adapting") {
    const auto learner = make_learner("ets", {});
    RegressorPair pair;
    pair.u = Eigen::VectorXd::Constant(1, 0.5);
    pair.v = Eigen::VectorXd::Constant(1, 0.2);
    for (int t = 0; t < 40; ++t) {
        pair.origin_index = t;
        learner->step(pair);
    }
    learner->set_frozen(true);
    const auto before = learner->state_json().dump();
    pair.v[0] = 0.9;
    for (int t = 40; t < 60; ++t) {
        pair.origin_index = t;
        const auto prediction = learner->step(pair);
        CHECK(prediction[0] == doctest::Approx(0.2).epsilon(1e-3));
    }
    CHECK(learner->state_json().dump() == before);
}

TEST_CASE("run_experiment writes a scored report per algorithm") {
    TempDir dir;
    const auto cfg = small_experiment(dir);
    const auto artifacts = run_experiment(cfg);
    REQUIRE(artifacts.reports.size() == 3);
    for (const auto& report : artifacts.reports) {
        CHECK(report.problem == "P1");
        CHECK(report.rmse > 0.0);
        CHECK(std::isfinite(report.ndei));
        CHECK(report.final_rule_count >= 1);
        CHECK(!report.predictions.empty());
    }
    for (const auto& path : artifacts.report_paths) CHECK(fs::exists(path));
    CHECK(fs::exists(artifacts.manifest_path));
    CHECK(fs::exists(cfg.output_dir / "predictions_P1_ets.csv"));
    CHECK(fs::exists(cfg.output_dir / "model_P1_ets.json"));

    const auto manifest = nlohmann::json::parse(read_bytes(artifacts.manifest_path));
    CHECK(manifest.at("config_hash").get<std::string>().size() == 16);
    CHECK(manifest.at("reports").size() == 3);
    CHECK(manifest.at("freeze") == false);
}

TEST_CASE("two runs of one config produce byte-identical reports") {
    TempDir dir;
    auto cfg = small_experiment(dir);
    cfg.output_dir = dir.path / "run_a";
    const auto first = run_experiment(cfg);
    cfg.output_dir = dir.path / "run_b";
    const auto second = run_experiment(cfg);
    REQUIRE(first.report_paths.size() == second.report_paths.size());
    for (std::size_t i = 0; i < first.report_paths.size(); ++i) {
        CHECK(read_bytes(first.report_paths[i]) == read_bytes(second.report_paths[i]));
        CHECK(first.report_paths[i].filename() == second.report_paths[i].filename());
    }
    // Predictions CSVs must match bytewise too.
    CHECK(read_bytes(dir.path / "run_a" / "predictions_P1_mcfis.csv") ==
          read_bytes(dir.path / "run_b" / "predictions_P1_mcfis.csv"));
}

TEST_CASE("the stored rmse is recomputable from the predictions CSV") {
    TempDir dir;
    const auto cfg = small_experiment(dir);
    const auto artifacts = run_experiment(cfg);
    for (const auto& report : artifacts.reports) {
        const auto table = csv::read_file(cfg.output_dir /
                                          ("predictions_P1_" + report.algorithm + ".csv"));
        const int a_col = table.column("actual_1");
        const int p_col = table.column("predicted_1");
        REQUIRE(a_col >= 0);
        REQUIRE(p_col >= 0);
        std::vector<Eigen::VectorXd> actuals, predictions;
        for (const auto& row : table.rows) {
            actuals.push_back(
                Eigen::VectorXd::Constant(1, std::stod(row[static_cast<std::size_t>(a_col)])));
            predictions.push_back(
                Eigen::VectorXd::Constant(1, std::stod(row[static_cast<std::size_t>(p_col)])));
        }
        CHECK(rmse(actuals, predictions) == doctest::Approx(report.rmse).epsilon(1e-12));
    }
}

TEST_CASE("a run with train_fraction one is refused before any learner starts") {
    TempDir dir;
    auto cfg = small_experiment(dir);
    cfg.window.train_fraction = 1.0;
    CHECK_THROWS_AS(run_experiment(cfg), SplitError);
}

TEST_CASE("freezing changes test-phase behavior but not the frozen model") {
    TempDir dir;
    auto cfg = small_experiment(dir);
    cfg.output_dir = dir.path / "live";
    const auto live = run_experiment(cfg, false);
    cfg.output_dir = dir.path / "frozen";
    const auto frozen = run_experiment(cfg, true);

    // Same training stream, so the frozen manifest records the same hash.
    const auto live_manifest = nlohmann::json::parse(read_bytes(live.manifest_path));
    const auto frozen_manifest = nlohmann::json::parse(read_bytes(frozen.manifest_path));
    CHECK(live_manifest.at("config_hash") == frozen_manifest.at("config_hash"));
    CHECK(frozen_manifest.at("freeze") == true);

    // A frozen eTS model must end the test stream with exactly the rule
    // count it had after training; the adapting run may differ in scores.
    const auto live_model =
        nlohmann::json::parse(read_bytes(fs::path(dir.path / "live" / "model_P1_ets.json")));
    const auto frozen_model = nlohmann::json::parse(
        read_bytes(fs::path(dir.path / "frozen" / "model_P1_ets.json")));
    CHECK(frozen_model.at("k") <= live_model.at("k"));
}

TEST_CASE("score matrices parse from CSV and reject bad cells") {
    csv::Table table;
    table.header = {"problem", "ets", "safis"};
    table.rows = {{"F1", "0.10", "0.20"}, {"F2", "0.15", "0.12"}};
    const auto matrix = score_matrix_from_csv(table);
    CHECK(matrix.problems == std::vector<std::string>{"F1", "F2"});
    CHECK(matrix.algorithms == std::vector<std::string>{"ets", "safis"});
    CHECK(matrix.scores(1, 1) == doctest::Approx(0.12));

    csv::Table bad = table;
    bad.rows[1][2] = "fast";
    CHECK_THROWS_WITH_AS(score_matrix_from_csv(bad), doctest::Contains("F2"), StatsError);

    csv::Table thin;
    thin.header = {"problem", "only"};
    thin.rows = {{"F1", "0.1"}};
    CHECK_THROWS_AS(score_matrix_from_csv(thin), StatsError);
}

TEST_CASE("score matrices assemble from report files and name missing cells") {
    TempDir dir;
    auto write_report = [&](const std::string& problem, const std::string& algorithm,
                            double value) {
        ExperimentReport report;
        report.problem = problem;
        report.algorithm = algorithm;
        report.rmse = value;
        report.ndei = value * 2;
        report.final_rule_count = 3;
        const auto path = dir.path / ("report_" + problem + "_" + algorithm + ".json");
        std::ofstream out(path);
        out << report_to_json(report).dump(2) << "\n";
        return path;
    };
    std::vector<fs::path> files;
    for (const std::string problem : {"F1", "F2"})
        for (const std::string algorithm : {"ets", "mcfis"})
            files.push_back(write_report(problem, algorithm, problem == "F1" ? 0.1 : 0.2));

    const auto matrix = score_matrix_from_reports(files);
    CHECK(matrix.problems == std::vector<std::string>{"F1", "F2"});
    CHECK(matrix.algorithms == std::vector<std::string>{"ets", "mcfis"});
    CHECK(matrix.scores(0, 0) == doctest::Approx(0.1));

    files.pop_back(); // drop (F2, mcfis)
    CHECK_THROWS_WITH_AS(score_matrix_from_reports(files), doctest::Contains("F2"), StatsError);
}

TEST_CASE("run_stats emits both CSVs and runs the rank test when it can") {
    TempDir dir;
    ScoreMatrix matrix;
    matrix.problems = {"F1", "F2", "F3", "F4", "F5", "F6"};
    matrix.algorithms = {"ets", "safis", "mcfis"};
    matrix.scores.resize(6, 3);
    matrix.scores << 0.1558, 0.2291, 0.1555, //
        0.2094, 0.2947, 0.1657,              //
        0.1019, 0.1174, 0.0964,              //
        0.1334, 0.1496, 0.1328,              //
        0.0909, 0.0976, 0.0867,              //
        0.1365, 0.1239, 0.1221;

    const auto stats = run_stats(matrix, dir.path / "stats");
    CHECK(stats.friedman_ran);
    CHECK(stats.friedman.q == doctest::Approx(10.3333).epsilon(1e-3));
    CHECK(fs::exists(stats.ranks_csv_path));
    CHECK(fs::exists(stats.cd_csv_path));

    const auto j = stats_to_json(stats);
    CHECK(j.at("friedman").at("q") == doctest::Approx(10.3333).epsilon(1e-3));
    CHECK(j.at("average_ranks").at("mcfis") == doctest::Approx(1.0));
    CHECK(j.at("critical_difference").at("alpha_0.05") == doctest::Approx(1.294).epsilon(0.004));
}

TEST_CASE("run_stats on a single problem skips the rank test but still ranks") {
    TempDir dir;
    ScoreMatrix matrix;
    matrix.problems = {"F1"};
    matrix.algorithms = {"ets", "safis", "mcfis"};
    matrix.scores.resize(1, 3);
    matrix.scores << 0.3, 0.2, 0.1;

    const auto stats = run_stats(matrix, dir.path / "stats");
    CHECK(!stats.friedman_ran);
    CHECK(stats.friedman_message.find("at least 2") != std::string::npos);
    CHECK(stats.table.average_ranks[2] == doctest::Approx(1.0));
    CHECK(fs::exists(stats.ranks_csv_path));

    const auto j = stats_to_json(stats);
    CHECK(j.at("friedman").is_null());
    CHECK(j.at("message").get<std::string>().find("skipped") != std::string::npos);
}

TEST_CASE("config hashes are stable and collision-averse") {
    const auto a = config_hash(minimal_config_json());
    const auto b = config_hash(minimal_config_json());
    CHECK(a == b);
    CHECK(a.size() == 16);
    auto changed = minimal_config_json();
    changed["window"]["nu"] = 5;
    CHECK(config_hash(changed) != a);
}

TEST_SUITE_END();
