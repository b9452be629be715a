#pragma once

#include "evofis/timeseries.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace evofis {

/// Parameters for the deterministic synthetic generators. kind is one of
/// "sine", "two-cluster", "drift", "daily-profile". noise is the standard
/// deviation of additive Gaussian noise; with noise == 0 no random draw is
/// made at all, so the output is identical across standard-library
/// implementations.
struct SynthConfig {
    std::string kind = "sine";
    int length = 200;
    double noise = 0.0;
    std::uint32_t seed = 0;
    bool covariate = false;  // daily-profile: add the temperature channel
    int shift_every = 300;   // drift: samples between mean shifts
};

/// Generate one synthetic series. Throws ConfigError on an unknown kind or
/// a length below the shortest usable window (15 samples).
RawSeries generate_series(const SynthConfig& cfg);

/// Sidecar metadata describing the generator; for the drift kind it lists
/// the exact indices where the mean shifts.
nlohmann::json series_metadata(const SynthConfig& cfg);

/// Write a series as CSV with a numeric timestamp column (seconds at the
/// series' sample interval) followed by the value and exogenous columns.
void write_series_csv(const std::filesystem::path& path, const RawSeries& series);

} // namespace evofis
