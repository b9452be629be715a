#include "evofis/timeseries.hpp"

#include "evofis/csv.hpp"
#include "evofis/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace evofis {

namespace {

double parse_cell(const std::string& cell, const std::string& column, std::size_t data_row) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(cell, &pos);
    } catch (const std::exception&) {
        throw IngestError("non-numeric cell '" + cell + "' in column '" + column +
                          "' at data row " + std::to_string(data_row));
    }
    while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) {
        ++pos;
    }
    if (pos != cell.size() || !std::isfinite(value)) {
        throw IngestError("non-numeric cell '" + cell + "' in column '" + column +
                          "' at data row " + std::to_string(data_row));
    }
    return value;
}

} // namespace

RawSeries ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    const csv::Table table = csv::read_file(path);

    const int value_col = table.column(schema.value_column);
    if (value_col < 0) {
        throw SchemaError("missing value column '" + schema.value_column + "' in " + path.string());
    }
    int ts_col = -1;
    if (!schema.timestamp_column.empty()) {
        ts_col = table.column(schema.timestamp_column);
        if (ts_col < 0) {
            throw SchemaError("missing timestamp column '" + schema.timestamp_column + "' in " +
                              path.string());
        }
    }
    std::vector<int> exo_cols;
    for (const auto& name : schema.exogenous_columns) {
        const int col = table.column(name);
        if (col < 0) {
            throw SchemaError("missing exogenous column '" + name + "' in " + path.string());
        }
        exo_cols.push_back(col);
    }

    RawSeries series;
    series.name = path.stem().string();
    series.values.reserve(table.rows.size());
    for (const auto& name : schema.exogenous_columns) {
        series.exogenous.push_back({name, {}});
        series.exogenous.back().values.reserve(table.rows.size());
    }

    double last_ts = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const std::size_t data_row = i + 1;
        if (ts_col >= 0) {
            const double ts = parse_cell(row[ts_col], schema.timestamp_column, data_row);
            if (ts <= last_ts) {
                throw IngestError("out-of-order timestamp at data row " + std::to_string(data_row));
            }
            last_ts = ts;
        }
        series.values.push_back(parse_cell(row[value_col], schema.value_column, data_row));
        for (std::size_t e = 0; e < exo_cols.size(); ++e) {
            series.exogenous[e].values.push_back(
                parse_cell(row[exo_cols[e]], schema.exogenous_columns[e], data_row));
        }
    }
    if (series.values.empty()) {
        throw IngestError("no data rows in " + path.string());
    }
    return series;
}

namespace {

ChannelRange fit_channel(const std::string& name, const std::vector<double>& values,
                         std::size_t train_count) {
    double lo = values[0];
    double hi = values[0];
    for (std::size_t i = 0; i < train_count; ++i) {
        lo = std::min(lo, values[i]);
        hi = std::max(hi, values[i]);
    }
    if (!(hi > lo)) {
        throw DegenerateChannelError("channel '" + name + "' is constant (" + std::to_string(lo) +
                                     ") over the training prefix");
    }
    return {name, lo, hi};
}

} // namespace

NormalizationParams fit_normalizer(const RawSeries& series, std::size_t train_count) {
    if (train_count < 1 || train_count > series.values.size()) {
        throw WindowError("train_count " + std::to_string(train_count) +
                          " outside series length " + std::to_string(series.values.size()));
    }
    for (const auto& exo : series.exogenous) {
        if (exo.values.size() != series.values.size()) {
            throw DimensionError("exogenous series '" + exo.name + "' length " +
                                 std::to_string(exo.values.size()) + " != " +
                                 std::to_string(series.values.size()));
        }
    }
    NormalizationParams params;
    params.channels.push_back(fit_channel(series.name.empty() ? "value" : series.name,
                                          series.values, train_count));
    for (const auto& exo : series.exogenous) {
        params.channels.push_back(fit_channel(exo.name, exo.values, train_count));
    }
    return params;
}

std::vector<double> normalize_values(const std::vector<double>& values, const ChannelRange& range) {
    const double span = range.max - range.min;
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = (values[i] - range.min) / span;
    }
    return out;
}

std::vector<double> denormalize_values(const std::vector<double>& values, const ChannelRange& range) {
    const double span = range.max - range.min;
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = values[i] * span + range.min;
    }
    return out;
}

namespace {

void check_channels(const RawSeries& series, const NormalizationParams& params) {
    if (params.channels.size() != series.channel_count()) {
        throw DimensionError("normalization has " + std::to_string(params.channels.size()) +
                             " channels, series has " + std::to_string(series.channel_count()));
    }
}

} // namespace

RawSeries normalize(const RawSeries& series, const NormalizationParams& params) {
    check_channels(series, params);
    RawSeries out = series;
    out.values = normalize_values(series.values, params.channels[0]);
    for (std::size_t e = 0; e < series.exogenous.size(); ++e) {
        out.exogenous[e].values = normalize_values(series.exogenous[e].values, params.channels[e + 1]);
    }
    return out;
}

RawSeries denormalize(const RawSeries& series, const NormalizationParams& params) {
    check_channels(series, params);
    RawSeries out = series;
    out.values = denormalize_values(series.values, params.channels[0]);
    for (std::size_t e = 0; e < series.exogenous.size(); ++e) {
        out.exogenous[e].values =
            denormalize_values(series.exogenous[e].values, params.channels[e + 1]);
    }
    return out;
}

std::size_t pair_count(std::size_t series_length, const WindowConfig& cfg) {
    const std::size_t lead = static_cast<std::size_t>(std::max(cfg.nu, cfg.mu));
    const std::size_t need = lead + static_cast<std::size_t>(cfg.gamma);
    if (series_length < need) {
        return 0;
    }
    return series_length - need + 1;
}

std::vector<RegressorPair> build_pairs(const RawSeries& series, const WindowConfig& cfg) {
    if (cfg.nu < 1 || cfg.gamma < 1 || cfg.mu < 0) {
        throw WindowError("window requires nu >= 1, gamma >= 1, mu >= 0");
    }
    if (cfg.mu > 0 && series.exogenous.empty()) {
        throw WindowError("mu > 0 but the series has no exogenous channels");
    }
    for (const auto& exo : series.exogenous) {
        if (exo.values.size() != series.values.size()) {
            throw DimensionError("exogenous series '" + exo.name + "' length mismatch");
        }
    }
    const std::size_t n = series.values.size();
    const std::size_t count = pair_count(n, cfg);
    if (count == 0) {
        const std::size_t need =
            static_cast<std::size_t>(std::max(cfg.nu, cfg.mu) + cfg.gamma);
        throw WindowError("series of length " + std::to_string(n) + " too short; need at least " +
                          std::to_string(need) + " samples");
    }

    const int n_exo = cfg.mu > 0 ? static_cast<int>(series.exogenous.size()) : 0;
    const int input_dim = cfg.nu + cfg.mu * n_exo;

    std::vector<RegressorPair> pairs;
    pairs.reserve(count);
    const std::size_t start = static_cast<std::size_t>(std::max(cfg.nu, cfg.mu)) - 1;
    for (std::size_t t = start; t + cfg.gamma < n; ++t) {
        RegressorPair pair;
        pair.origin_index = static_cast<std::int64_t>(t);
        pair.u.resize(input_dim);
        int at = 0;
        for (int j = 0; j < cfg.nu; ++j) {
            pair.u[at++] = series.values[t - j];
        }
        for (int e = 0; e < n_exo; ++e) {
            for (int j = 0; j < cfg.mu; ++j) {
                pair.u[at++] = series.exogenous[e].values[t - j];
            }
        }
        pair.v.resize(cfg.gamma);
        for (int j = 0; j < cfg.gamma; ++j) {
            pair.v[j] = series.values[t + 1 + j];
        }
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

std::pair<std::vector<RegressorPair>, std::vector<RegressorPair>>
split_stream(const std::vector<RegressorPair>& pairs, double train_fraction) {
    const std::size_t n_train = train_pair_count(pairs.size(), train_fraction);
    if (n_train == 0 || n_train >= pairs.size()) {
        throw SplitError("split would leave an empty partition (" + std::to_string(n_train) +
                         " train of " + std::to_string(pairs.size()) + " pairs)");
    }
    std::vector<RegressorPair> train(pairs.begin(), pairs.begin() + static_cast<long>(n_train));
    std::vector<RegressorPair> test(pairs.begin() + static_cast<long>(n_train), pairs.end());
    return {std::move(train), std::move(test)};
}

std::size_t train_pair_count(std::size_t total_pairs, double train_fraction) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
        throw SplitError("train_fraction must lie strictly between 0 and 1, got " +
                         std::to_string(train_fraction));
    }
    // The +1e-9 keeps e.g. 0.7 * 100 from flooring to 69.
    return static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(total_pairs) + 1e-9));
}

std::size_t train_sample_count(const WindowConfig& cfg, std::size_t n_train_pairs) {
    const std::size_t start = static_cast<std::size_t>(std::max(cfg.nu, cfg.mu)) - 1;
    const std::size_t last_origin = start + n_train_pairs - 1;
    return last_origin + static_cast<std::size_t>(cfg.gamma) + 1;
}

} // namespace evofis
