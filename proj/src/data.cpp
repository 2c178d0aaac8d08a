#include "dpmgarch/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dpmgarch/errors.hpp"

namespace dpmgarch {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

bool is_missing(std::string_view cell) {
    return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "null" || cell == ".";
}

double parse_number(std::string_view cell, std::size_t line_no) {
    double v = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw DataError("line " + std::to_string(line_no) + ": cannot parse number '" + std::string(cell) + "'");
    }
    return v;
}

struct RawTable {
    std::vector<Date> dates;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    std::size_t dropped = 0;
};

RawTable read_table(const std::filesystem::path& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    RawTable table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line, opts.delimiter);
        if (!have_header) {
            if (cells.size() < 2) throw DataError("header needs a date column and at least one asset column");
            for (std::size_t i = 1; i < cells.size(); ++i) table.labels.emplace_back(cells[i]);
            have_header = true;
            continue;
        }
        if (cells.size() != table.labels.size() + 1) {
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(table.labels.size() + 1) + " fields, found " + std::to_string(cells.size()));
        }
        const Date d = parse_date(cells[0]);
        bool missing = false;
        std::vector<double> row;
        row.reserve(table.labels.size());
        for (std::size_t i = 1; i < cells.size(); ++i) {
            if (is_missing(cells[i])) {
                missing = true;
                break;
            }
            row.push_back(parse_number(cells[i], line_no));
        }
        if (missing) {
            ++table.dropped;
            continue;
        }
        if (!table.dates.empty() && d <= table.dates.back()) {
            throw DataError("line " + std::to_string(line_no) + ": dates are not strictly increasing");
        }
        table.dates.push_back(d);
        table.rows.push_back(std::move(row));
    }
    if (!have_header) throw DataError("'" + path.string() + "' is empty");
    return table;
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows, std::size_t cols) {
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t i = 0; i < cols; ++i) m(static_cast<Index>(t), static_cast<Index>(i)) = rows[t][i];
    return m;
}

template <typename Series, typename Getter>
void write_panel(const Series& s, const Matrix& values, const std::filesystem::path& path, char delim, Getter) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "date";
    for (const auto& l : s.labels) out << delim << l;
    out << '\n';
    for (Index t = 0; t < values.rows(); ++t) {
        out << format_date(s.timestamps[static_cast<std::size_t>(t)]);
        for (Index i = 0; i < values.cols(); ++i) out << delim << format_double(values(t, i));
        out << '\n';
    }
}

}  // namespace

Date parse_date(std::string_view text) {
    text = trim(text);
    int y = 0;
    unsigned m = 0, d = 0;
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') {
        throw DataError("not an ISO-8601 date: '" + std::string(text) + "'");
    }
    auto num = [&](std::size_t pos, std::size_t len, auto& out) {
        const auto [p, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
        if (ec != std::errc() || p != text.data() + pos + len) throw DataError("not an ISO-8601 date: '" + std::string(text) + "'");
    };
    num(0, 4, y);
    num(5, 2, m);
    num(8, 2, d);
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw DataError("invalid calendar date: '" + std::string(text) + "'");
    return std::chrono::sys_days{ymd};
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

PriceSeries load_prices(const std::filesystem::path& path, const LoadOptions& opts) {
    RawTable raw = read_table(path, opts);
    PriceSeries s;
    s.labels = std::move(raw.labels);
    s.timestamps = std::move(raw.dates);
    s.prices = to_matrix(raw.rows, s.labels.size());
    s.dropped_rows = raw.dropped;
    for (Index t = 0; t < s.prices.rows(); ++t)
        for (Index i = 0; i < s.prices.cols(); ++i)
            if (!(s.prices(t, i) > 0.0))
                throw DataError("non-positive price " + format_double(s.prices(t, i)) + " for '" +
                                s.labels[static_cast<std::size_t>(i)] + "' on " +
                                format_date(s.timestamps[static_cast<std::size_t>(t)]));
    return s;
}

ReturnSeries load_returns(const std::filesystem::path& path, const LoadOptions& opts) {
    RawTable raw = read_table(path, opts);
    ReturnSeries s;
    s.labels = std::move(raw.labels);
    s.timestamps = std::move(raw.dates);
    s.returns = to_matrix(raw.rows, s.labels.size());
    s.dropped_rows = raw.dropped;
    return s;
}

void write_returns(const ReturnSeries& series, const std::filesystem::path& path, char delimiter) {
    write_panel(series, series.returns, path, delimiter, 0);
}

void write_prices(const PriceSeries& series, const std::filesystem::path& path, char delimiter) {
    write_panel(series, series.prices, path, delimiter, 0);
}

ReturnSeries to_log_returns(const PriceSeries& p) {
    if (p.rows() < 2) throw DataError("at least two price rows are needed to form returns");
    ReturnSeries r;
    r.labels = p.labels;
    r.timestamps.assign(p.timestamps.begin() + 1, p.timestamps.end());
    r.returns = 100.0 * (p.prices.bottomRows(p.rows() - 1).array() / p.prices.topRows(p.rows() - 1).array()).log().matrix();
    r.dropped_rows = p.dropped_rows;
    return r;
}

PriceSeries to_prices(const ReturnSeries& r, const RowVector& initial, Date first_date) {
    PriceSeries p;
    p.labels = r.labels;
    p.prices.resize(r.rows() + 1, r.assets());
    p.prices.row(0) = initial;
    Vector cumulative = Vector::Zero(r.assets());
    for (Index t = 0; t < r.rows(); ++t) {
        cumulative += r.returns.row(t).transpose() / 100.0;
        p.prices.row(t + 1) = initial.array() * cumulative.transpose().array().exp();
    }
    p.timestamps.reserve(static_cast<std::size_t>(r.rows() + 1));
    p.timestamps.push_back(first_date);
    p.timestamps.insert(p.timestamps.end(), r.timestamps.begin(), r.timestamps.end());
    return p;
}

double median(std::vector<double> values) {
    if (values.empty()) return std::nan("");
    const std::size_t n = values.size();
    const std::size_t mid = n / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

StatsTable descriptive_stats(const Matrix& x, std::vector<std::string> labels) {
    const Index n = x.rows();
    const Index k = x.cols();
    if (n < 2) throw DataError("descriptive statistics need at least two observations");
    if (labels.empty())
        for (Index i = 0; i < k; ++i) labels.push_back("x" + std::to_string(i + 1));

    StatsTable s;
    s.labels = std::move(labels);
    s.mean = x.colwise().mean().transpose();
    s.median.resize(k);
    s.variance.resize(k);
    s.skewness.resize(k);
    s.kurtosis.resize(k);
    s.degenerate.assign(static_cast<std::size_t>(k), false);

    const Matrix centered = x.rowwise() - s.mean.transpose();
    const double nd = static_cast<double>(n);
    for (Index i = 0; i < k; ++i) {
        const auto c = centered.col(i).array();
        const double m2 = c.square().sum() / nd;
        const double m3 = c.cube().sum() / nd;
        const double m4 = c.square().square().sum() / nd;
        s.variance(i) = c.square().sum() / (nd - 1.0);
        s.median(i) = median(std::vector<double>(x.col(i).data(), x.col(i).data() + n));
        if (m2 <= 0.0) {
            s.degenerate[static_cast<std::size_t>(i)] = true;
            s.skewness(i) = 0.0;
            s.kurtosis(i) = 0.0;
        } else {
            s.skewness(i) = m3 / std::pow(m2, 1.5);
            s.kurtosis(i) = m4 / (m2 * m2);
        }
    }

    const Matrix cov = centered.transpose() * centered / (nd - 1.0);
    s.correlation = Matrix::Identity(k, k);
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < i; ++j) {
            const bool degenerate = s.degenerate[static_cast<std::size_t>(i)] || s.degenerate[static_cast<std::size_t>(j)];
            const double r = degenerate ? 0.0 : std::clamp(cov(i, j) / std::sqrt(cov(i, i) * cov(j, j)), -1.0, 1.0);
            s.correlation(i, j) = s.correlation(j, i) = r;
        }
    return s;
}

std::string format_stats_text(const StatsTable& t) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << std::setw(12) << "";
    for (const auto& l : t.labels) os << std::setw(14) << l;
    os << '\n';
    auto row = [&](const char* name, const Vector& v) {
        os << std::setw(12) << std::left << name << std::right;
        for (Index i = 0; i < v.size(); ++i) os << std::setw(14) << v(i);
        os << '\n';
    };
    row("Mean", t.mean);
    row("Median", t.median);
    row("Variance", t.variance);
    row("Skewness", t.skewness);
    row("Kurtosis", t.kurtosis);
    os << "Correlation\n";
    for (Index i = 0; i < t.correlation.rows(); ++i) {
        os << std::setw(12) << std::left << t.labels[static_cast<std::size_t>(i)] << std::right;
        for (Index j = 0; j < t.correlation.cols(); ++j) os << std::setw(14) << t.correlation(i, j);
        os << '\n';
    }
    return os.str();
}

}  // namespace dpmgarch
