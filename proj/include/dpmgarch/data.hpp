#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "dpmgarch/linalg.hpp"

namespace dpmgarch {

using Date = std::chrono::sys_days;

/// Parse an ISO-8601 calendar date (YYYY-MM-DD). Throws DataError.
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

struct LoadOptions {
    char delimiter = ',';
};

/// Aligned price panel, one column per asset.
struct PriceSeries {
    std::vector<Date> timestamps;
    Matrix prices;  // T x K, strictly positive
    std::vector<std::string> labels;
    std::size_t dropped_rows = 0;  // rows discarded because a cell was missing

    Index rows() const { return prices.rows(); }
    Index assets() const { return prices.cols(); }
};

/// Percent log-returns; timestamps are the later date of each price pair.
struct ReturnSeries {
    std::vector<Date> timestamps;
    Matrix returns;  // T x K
    std::vector<std::string> labels;
    std::size_t dropped_rows = 0;

    Index rows() const { return returns.rows(); }
    Index assets() const { return returns.cols(); }
};

struct StatsTable {
    std::vector<std::string> labels;
    Vector mean, median, variance, skewness, kurtosis;
    Matrix correlation;
    std::vector<bool> degenerate;  // zero-variance column
};

/// Load a delimited price file: header row (date column + one label per
/// asset), ISO dates strictly increasing. Rows with any blank / NA cell are
/// dropped across all assets and counted.
PriceSeries load_prices(const std::filesystem::path& path, const LoadOptions& opts = {});

/// Same layout as load_prices, but the values are returns (any sign).
ReturnSeries load_returns(const std::filesystem::path& path, const LoadOptions& opts = {});

void write_returns(const ReturnSeries& series, const std::filesystem::path& path, char delimiter = ',');
void write_prices(const PriceSeries& series, const std::filesystem::path& path, char delimiter = ',');

/// returns(t, i) = 100 * ln(P(t+1, i) / P(t, i)).
ReturnSeries to_log_returns(const PriceSeries& prices);

/// Inverse of to_log_returns given the first price row.
PriceSeries to_prices(const ReturnSeries& returns, const RowVector& initial, Date first_date);

/// Per-column mean, median, variance (T-1 denominator), skewness m3/m2^1.5
/// and non-excess kurtosis m4/m2^2 (central moments with 1/T), plus the
/// Pearson correlation matrix. Zero-variance columns get skewness = kurtosis
/// = 0, correlation 0 off the diagonal and the `degenerate` flag.
StatsTable descriptive_stats(const Matrix& returns, std::vector<std::string> labels = {});
inline StatsTable descriptive_stats(const ReturnSeries& r) { return descriptive_stats(r.returns, r.labels); }

std::string format_stats_text(const StatsTable& table);

double median(std::vector<double> values);

}  // namespace dpmgarch
