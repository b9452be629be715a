#include "evofis/synth.hpp"

#include "evofis/csv.hpp"
#include "evofis/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace evofis {

namespace {

constexpr int kMinLength = 15; // default window (4 lags + 1 ahead) plus slack

class NoiseSource {
public:
    NoiseSource(double stddev, std::uint32_t seed) : stddev_(stddev), engine_(seed) {}

    // Draws nothing when the level is zero, keeping noiseless output
    // bit-identical regardless of the normal_distribution implementation.
    double operator()() {
        if (stddev_ == 0.0) return 0.0;
        return stddev_ * normal_(engine_);
    }

private:
    double stddev_;
    std::mt19937 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kClusterBlock = 60;   // two-cluster: samples per plateau
constexpr double kDriftStep = 0.3;  // drift: mean increment per shift

} // namespace

RawSeries generate_series(const SynthConfig& cfg) {
    if (cfg.length < kMinLength)
        throw ConfigError("synthetic series length must be at least " +
                          std::to_string(kMinLength) + ", got " + std::to_string(cfg.length));

    RawSeries series;
    series.name = cfg.kind;
    series.values.reserve(static_cast<std::size_t>(cfg.length));
    NoiseSource noise(cfg.noise, cfg.seed);

    if (cfg.kind == "sine") {
        for (int t = 0; t < cfg.length; ++t)
            series.values.push_back(std::sin(kTwoPi * t / 25.0) + noise());
    } else if (cfg.kind == "two-cluster") {
        for (int t = 0; t < cfg.length; ++t) {
            const bool high = (t / kClusterBlock) % 2 == 1;
            series.values.push_back((high ? 0.8 : 0.2) + noise());
        }
    } else if (cfg.kind == "drift") {
        if (cfg.shift_every < 1)
            throw ConfigError("drift shift_every must be positive");
        for (int t = 0; t < cfg.length; ++t) {
            const double mean = kDriftStep * (t / cfg.shift_every);
            series.values.push_back(mean + 0.2 * std::sin(kTwoPi * t / 25.0) + noise());
        }
    } else if (cfg.kind == "daily-profile") {
        for (int t = 0; t < cfg.length; ++t) {
            series.values.push_back(0.5 + 0.25 * std::sin(kTwoPi * t / 24.0) +
                                    0.15 * std::sin(kTwoPi * t / 168.0) + noise());
        }
        if (cfg.covariate) {
            ExogenousSeries temperature;
            temperature.name = "temperature";
            temperature.values.reserve(static_cast<std::size_t>(cfg.length));
            for (int t = 0; t < cfg.length; ++t)
                temperature.values.push_back(15.0 + 10.0 * std::sin(kTwoPi * t / 24.0) + noise());
            series.exogenous.push_back(std::move(temperature));
        }
    } else {
        throw ConfigError("unknown synthetic kind \"" + cfg.kind +
                          "\"; expected sine, two-cluster, drift, or daily-profile");
    }
    return series;
}

nlohmann::json series_metadata(const SynthConfig& cfg) {
    nlohmann::json meta;
    meta["kind"] = cfg.kind;
    meta["length"] = cfg.length;
    meta["noise"] = cfg.noise;
    meta["seed"] = cfg.seed;
    if (cfg.kind == "daily-profile") meta["covariate"] = cfg.covariate;
    if (cfg.kind == "drift") {
        meta["shift_every"] = cfg.shift_every;
        meta["shift_magnitude"] = kDriftStep;
        auto points = nlohmann::json::array();
        for (int t = cfg.shift_every; t < cfg.length; t += cfg.shift_every)
            points.push_back(t);
        meta["shift_points"] = std::move(points);
    }
    return meta;
}

void write_series_csv(const std::filesystem::path& path, const RawSeries& series) {
    csv::Table table;
    table.header.push_back("timestamp");
    table.header.push_back(series.name == "daily-profile" ? "load" : "value");
    for (const auto& exo : series.exogenous)
        table.header.push_back(exo.name);

    for (std::size_t t = 0; t < series.values.size(); ++t) {
        std::vector<std::string> row;
        row.push_back(csv::format_double(static_cast<double>(t) * series.sample_interval_s));
        row.push_back(csv::format_double(series.values[t]));
        for (const auto& exo : series.exogenous)
            row.push_back(csv::format_double(exo.values[t]));
        table.rows.push_back(std::move(row));
    }
    csv::write_file(path, table);
}

} // namespace evofis
