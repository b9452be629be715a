#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace evofis {

/// Column mapping for CSV ingestion. The timestamp column is optional; when
/// present it must be numeric and strictly increasing.
struct CsvSchema {
    std::string timestamp_column;                  // empty = no timestamp check
    std::string value_column = "value";
    std::vector<std::string> exogenous_columns;    // e.g. {"temperature"}
};

/// A named exogenous series co-sampled with the output series.
struct ExogenousSeries {
    std::string name;
    std::vector<double> values;
};

/// One raw measurement stream plus any co-sampled exogenous streams.
struct RawSeries {
    std::string name;
    double sample_interval_s = 3600.0;
    std::vector<double> values;
    std::vector<ExogenousSeries> exogenous;

    std::size_t channel_count() const { return 1 + exogenous.size(); }
};

/// Windowing parameters: nu past outputs, mu past exogenous samples per
/// exogenous channel, gamma steps predicted ahead.
struct WindowConfig {
    int nu = 4;
    int mu = 0;
    int gamma = 1;
    double train_fraction = 0.85;
};

/// One training event: input vector u (nu lags of the output followed by mu
/// lags of each exogenous channel) and target vector v (the next gamma
/// outputs). origin_index is the position t of u's most recent output lag.
struct RegressorPair {
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    std::int64_t origin_index = 0;
};

struct ChannelRange {
    std::string name;
    double min = 0.0;
    double max = 1.0;
};

/// Per-channel min/max fitted on a training prefix; channel 0 is the output
/// series, the rest follow the exogenous order of the series.
struct NormalizationParams {
    std::vector<ChannelRange> channels;
};

/// Read a series from CSV. Rejects missing columns (SchemaError), and
/// non-numeric cells, NaNs or out-of-order timestamps (IngestError, with the
/// offending data row number).
RawSeries ingest_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Min/max per channel over the first train_count samples only.
/// Throws DegenerateChannelError when a channel is constant on that prefix.
NormalizationParams fit_normalizer(const RawSeries& series, std::size_t train_count);

/// Map every channel through (x - min) / (max - min). Values outside the
/// fitted range map outside [0, 1]; nothing is clipped.
RawSeries normalize(const RawSeries& series, const NormalizationParams& params);

/// Exact inverse of normalize.
RawSeries denormalize(const RawSeries& series, const NormalizationParams& params);

std::vector<double> normalize_values(const std::vector<double>& values, const ChannelRange& range);
std::vector<double> denormalize_values(const std::vector<double>& values, const ChannelRange& range);

/// Number of regressor pairs a series of length n yields under cfg.
std::size_t pair_count(std::size_t series_length, const WindowConfig& cfg);

/// Build all (u, v) pairs in time order. Throws WindowError when the series
/// is shorter than the window requires.
std::vector<RegressorPair> build_pairs(const RawSeries& series, const WindowConfig& cfg);

/// Number of pairs the split assigns to training:
/// floor(train_fraction * total). Throws SplitError for a fraction outside
/// (0, 1).
std::size_t train_pair_count(std::size_t total_pairs, double train_fraction);

/// Sequential split: first train_pair_count(...) pairs train, the rest
/// test, order preserved. Throws SplitError when a side would be empty.
std::pair<std::vector<RegressorPair>, std::vector<RegressorPair>>
split_stream(const std::vector<RegressorPair>& pairs, double train_fraction);

/// Raw-sample count touched by the first n_train_pairs pairs; this is the
/// leak-free prefix length to fit the normalizer on.
std::size_t train_sample_count(const WindowConfig& cfg, std::size_t n_train_pairs);

} // namespace evofis
