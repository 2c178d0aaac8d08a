#include "dpmgarch/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "dpmgarch/errors.hpp"

namespace dpmgarch {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_line(const std::string& line, char delim = ',') {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, delim)) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

double parse_cell(const std::string& cell, const fs::path& path, std::size_t line) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw DataError(path.string() + ":" + std::to_string(line) + ": not a number: '" + cell + "'");
    return v;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

void append_flat(std::vector<double>& row, const Matrix& m) {
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
}

Matrix unflatten_square(const Matrix& values, Index row, Index first, Index k) {
    Matrix m(k, k);
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < k; ++j) m(i, j) = values(row, first + i * k + j);
    return m;
}

Index require_column(const NumericTable& t, const std::string& name, const fs::path& path) {
    const Index c = t.column(name);
    if (c < 0) throw DataError("schema mismatch in '" + path.string() + "': missing column '" + name + "'");
    return c;
}

Json rates(const std::vector<BlockStats>& stats) {
    Json j = Json::object();
    for (const auto& b : stats) j[b.name] = b.acceptance();
    return j;
}

}  // namespace

Index NumericTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<Index>(i);
    return -1;
}

NumericTable read_numeric_table(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    NumericTable t;
    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
    t.header = split_line(line);
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_line(line);
        if (cells.size() != t.header.size())
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(t.header.size()) + " columns, found " + std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_cell(c, path, line_no));
        rows.push_back(std::move(row));
    }
    t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) t.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return t;
}

void write_numeric_table(const fs::path& path, const std::vector<std::string>& header, const Matrix& values) {
    if (static_cast<Index>(header.size()) != values.cols())
        throw std::invalid_argument("header and table widths differ");
    auto out = open_out(path);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (Index r = 0; r < values.rows(); ++r) {
        for (Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << format_double(values(r, c));
        out << '\n';
    }
}

Json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("invalid JSON in '" + path.string() + "': " + e.what());
    }
}

void write_json(const fs::path& path, const Json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

Json to_json(const Matrix& m) {
    Json j = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
        j.push_back(std::move(row));
    }
    return j;
}

Matrix matrix_from_json(const Json& j) {
    const auto rows = static_cast<Index>(j.size());
    const Index cols = rows > 0 ? static_cast<Index>(j[0].size()) : 0;
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        if (static_cast<Index>(j[static_cast<std::size_t>(i)].size()) != cols) throw DataError("ragged matrix in JSON");
        for (Index c = 0; c < cols; ++c) m(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

Json to_json(const Vector& v) {
    Json j = Json::array();
    for (Index i = 0; i < v.size(); ++i) j.push_back(v(i));
    return j;
}

Vector vector_from_json(const Json& j) {
    Vector v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

Json to_json(const Summary& s) {
    return Json{{"mean", s.mean}, {"sd", s.sd},   {"median", s.median}, {"lower_95", s.lower},
                {"upper_95", s.upper}, {"min", s.min}, {"max", s.max},       {"count", s.count}};
}

Json to_json(const GarchParams& p) {
    return Json{{"variant", to_string(p.variant)}, {"mu", to_json(p.mu)},       {"omega", to_json(p.omega)},
                {"alpha", to_json(p.alpha)},       {"beta", to_json(p.beta)},   {"phi", to_json(p.phi)},
                {"kappa", to_json(p.kappa)},       {"lambda", to_json(p.lambda)}, {"delta", to_json(p.delta)}};
}

GarchParams params_from_json(const Json& j) {
    try {
        GarchParams p;
        p.variant = parse_variant(j.at("variant").get<std::string>());
        p.mu = vector_from_json(j.at("mu"));
        p.omega = vector_from_json(j.at("omega"));
        p.alpha = vector_from_json(j.at("alpha"));
        p.beta = vector_from_json(j.at("beta"));
        p.phi = vector_from_json(j.at("phi"));
        p.kappa = vector_from_json(j.at("kappa"));
        p.lambda = vector_from_json(j.at("lambda"));
        p.delta = vector_from_json(j.at("delta"));
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid parameter record: ") + e.what());
    }
}

Json to_json(const DpmHyper& h) {
    return Json{{"a0", h.a0}, {"b0", h.b0}, {"df", h.df}, {"base_scale", to_json(h.base_scale)},
                {"max_components", h.max_components},
                {"concentration_count", h.concentration_count == ClusterCount::occupied ? "occupied" : "max_label"}};
}

DpmHyper hyper_from_json(const Json& j) {
    DpmHyper h;
    h.a0 = j.at("a0").get<double>();
    h.b0 = j.at("b0").get<double>();
    h.df = j.at("df").get<double>();
    h.base_scale = matrix_from_json(j.at("base_scale"));
    h.max_components = j.at("max_components").get<int>();
    if (j.contains("concentration_count"))
        h.concentration_count =
            j["concentration_count"].get<std::string>() == "max_label" ? ClusterCount::max_label : ClusterCount::occupied;
    h.validate();
    return h;
}

Json to_json(const DpmSnapshot& s) {
    Json prec = Json::array();
    for (const auto& m : s.precisions) prec.push_back(to_json(m));
    return Json{{"concentration", s.concentration}, {"sticks", to_json(s.sticks)}, {"weights", to_json(s.weights)},
                {"precisions", prec}, {"counts", s.counts}};
}

DpmSnapshot snapshot_from_json(const Json& j) {
    DpmSnapshot s;
    s.concentration = j.at("concentration").get<double>();
    s.sticks = vector_from_json(j.at("sticks"));
    s.weights = vector_from_json(j.at("weights"));
    for (const auto& m : j.at("precisions")) s.precisions.push_back(matrix_from_json(m));
    s.counts = j.at("counts").get<std::vector<int>>();
    if (static_cast<Index>(s.precisions.size()) != s.weights.size())
        throw DataError("snapshot has " + std::to_string(s.precisions.size()) + " precisions for " +
                        std::to_string(s.weights.size()) + " weights");
    return s;
}

Json to_json(const StatsTable& t) {
    Json assets = Json::array();
    for (std::size_t i = 0; i < t.labels.size(); ++i) {
        const auto k = static_cast<Index>(i);
        assets.push_back(Json{{"label", t.labels[i]},
                              {"mean", t.mean(k)},
                              {"median", t.median(k)},
                              {"variance", t.variance(k)},
                              {"skewness", t.skewness(k)},
                              {"kurtosis", t.kurtosis(k)},
                              {"degenerate", static_cast<bool>(t.degenerate[i])}});
    }
    return Json{{"assets", assets}, {"correlation", to_json(t.correlation)}};
}

Json to_json(const ErrorSpec& s) {
    Json j{{"kind", to_string(s.kind)}, {"dimension", s.dimension}};
    if (s.kind == ErrorKind::student_t) {
        j["nu"] = s.nu;
        j["standardized"] = s.standardized;
    }
    if (s.kind == ErrorKind::mixture) {
        j["weights"] = to_json(s.weights);
        Json c = Json::array();
        for (const auto& m : s.covariances) c.push_back(to_json(m));
        j["covariances"] = c;
    }
    return j;
}

Json to_json(const FilterOptions& o) {
    Json j = Json::object();
    if (o.target) j["target"] = to_json(*o.target);
    if (o.initial_variance) j["initial_variance"] = to_json(*o.initial_variance);
    if (o.initial_q) j["initial_q"] = to_json(*o.initial_q);
    return j;
}

FilterOptions filter_options_from_json(const Json& j) {
    FilterOptions o;
    if (j.contains("target")) o.target = matrix_from_json(j["target"]);
    if (j.contains("initial_variance")) o.initial_variance = vector_from_json(j["initial_variance"]);
    if (j.contains("initial_q")) o.initial_q = matrix_from_json(j["initial_q"]);
    return o;
}

std::vector<std::string> matrix_headers(const std::string& prefix, Index k) {
    std::vector<std::string> h;
    for (Index i = 1; i <= k; ++i)
        for (Index j = 1; j <= k; ++j) h.push_back(prefix + "_" + std::to_string(i) + "_" + std::to_string(j));
    return h;
}

namespace {

std::vector<std::string> draw_header(const std::vector<std::string>& names, Index k) {
    std::vector<std::string> h{"iter", "chain", "loglik", "concentration", "zstar", "occupied"};
    h.insert(h.end(), names.begin(), names.end());
    const auto hn = matrix_headers("h_next", k);
    h.insert(h.end(), hn.begin(), hn.end());
    return h;
}

}  // namespace

void write_draws(const PosteriorDraws& d, const fs::path& dir) {
    const Index m_total = d.size();
    const Index per_chain = d.chains > 0 ? std::max<Index>(1, m_total / d.chains) : m_total;
    const auto header = draw_header(d.names, d.assets);
    Matrix table(m_total, static_cast<Index>(header.size()));
    for (Index m = 0; m < m_total; ++m) {
        std::vector<double> row{static_cast<double>(m), static_cast<double>(m / per_chain), d.log_likelihood(m),
                                d.concentration(m), static_cast<double>(d.max_allocation[static_cast<std::size_t>(m)]),
                                static_cast<double>(d.occupied[static_cast<std::size_t>(m)])};
        for (Index p = 0; p < d.params.cols(); ++p) row.push_back(d.params(m, p));
        append_flat(row, d.next_covariance[static_cast<std::size_t>(m)]);
        table.row(m) = Eigen::Map<const RowVector>(row.data(), static_cast<Index>(row.size()));
    }
    write_numeric_table(dir / files::draws, header, table);
    auto out = open_out(dir / files::states);
    for (const auto& s : d.states) out << to_json(s).dump() << '\n';
}

Json estimate_manifest(const PosteriorDraws& d, const McmcConfig& cfg) {
    Json mcmc{{"burn_in", cfg.burn_in},
              {"draws", cfg.draws},
              {"thin", cfg.thin},
              {"adapt_window", cfg.adapt_window},
              {"accept_band", {cfg.accept_low, cfg.accept_high}},
              {"scale_factors", {cfg.scale_up, cfg.scale_down}},
              {"scale_floor", cfg.scale_floor},
              {"learn_covariance", cfg.learn_covariance},
              {"refresh_target", cfg.refresh_target},
              {"ml_start", cfg.ml_start},
              {"max_numeric_failures", cfg.max_numeric_failures}};
    Json scales = Json::object();
    for (const auto& b : d.burn_in_stats) scales[b.name] = b.final_scale;
    return Json{{"command", "estimate"},
                {"seed", d.seed},
                {"chains", d.chains},
                {"variant", to_string(d.variant)},
                {"error_model", to_string(d.error_model)},
                {"mode", d.error_model == ErrorModel::gaussian ? "single-component" : "dirichlet-process-mixture"},
                {"assets", d.assets},
                {"observations", d.observations},
                {"retained", d.size()},
                {"names", d.names},
                {"mcmc", mcmc},
                {"hyper", to_json(d.hyper)},
                {"start", to_json(d.start)},
                {"ml_start_used", d.ml_start_used},
                {"acceptance", {{"burn_in", rates(d.burn_in_stats)}, {"retained", rates(d.retained_stats)}}},
                {"final_scales", scales},
                {"numeric_failures", d.numeric_failures},
                {"cluster_trace", d.occupied},
                {"warnings", d.warnings},
                {"wall_seconds", d.wall_seconds}};
}

PosteriorDraws read_draws(const fs::path& dir) {
    const Json man = read_json(dir / files::manifest);
    PosteriorDraws d;
    try {
        d.variant = parse_variant(man.at("variant").get<std::string>());
        d.error_model = parse_error_model(man.at("error_model").get<std::string>());
        d.assets = man.at("assets").get<Index>();
        d.observations = man.at("observations").get<std::size_t>();
        d.names = man.at("names").get<std::vector<std::string>>();
        d.hyper = hyper_from_json(man.at("hyper"));
        d.seed = man.at("seed").get<std::uint64_t>();
        d.chains = man.at("chains").get<int>();
        d.start = params_from_json(man.at("start"));
        d.ml_start_used = man.at("ml_start_used").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("manifest schema mismatch: " + std::string(e.what()));
    }
    if (d.names != GarchParams::names(d.variant, d.assets))
        throw DataError("manifest parameter names do not match the variant");

    const fs::path draws_path = dir / files::draws;
    const NumericTable t = read_numeric_table(draws_path);
    const auto expected = draw_header(d.names, d.assets);
    if (t.header != expected) throw DataError("draw-file schema mismatch in '" + draws_path.string() + "'");
    const Index m_total = t.values.rows();
    const auto np = static_cast<Index>(d.names.size());
    d.log_likelihood = t.values.col(2);
    d.concentration = t.values.col(3);
    d.params = t.values.middleCols(6, np);
    for (Index m = 0; m < m_total; ++m) {
        d.max_allocation.push_back(static_cast<int>(t.values(m, 4)));
        d.occupied.push_back(static_cast<int>(t.values(m, 5)));
        d.next_covariance.push_back(unflatten_square(t.values, m, 6 + np, d.assets));
    }

    const fs::path states_path = dir / files::states;
    std::ifstream in(states_path);
    if (!in) throw DataError("cannot open '" + states_path.string() + "'");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            d.states.push_back(snapshot_from_json(Json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("invalid state record in '" + states_path.string() + "': " + e.what());
        }
    }
    if (static_cast<Index>(d.states.size()) != m_total)
        throw DataError("draws and states disagree: " + std::to_string(m_total) + " vs " +
                        std::to_string(d.states.size()));
    return d;
}

void write_predictive(const PredictiveDraws& pd, const fs::path& dir) {
    const Index k = pd.assets;
    std::vector<std::string> header{"draw", "fresh"};
    for (Index i = 1; i <= k; ++i) header.push_back("mu_" + std::to_string(i));
    for (const char* prefix : {"hstar", "h", "lambda"}) {
        const auto h = matrix_headers(prefix, k);
        header.insert(header.end(), h.begin(), h.end());
    }
    Matrix cov(pd.size(), static_cast<Index>(header.size()));
    for (Index m = 0; m < pd.size(); ++m) {
        const auto um = static_cast<std::size_t>(m);
        std::vector<double> row{static_cast<double>(m), pd.fresh[um] ? 1.0 : 0.0};
        for (Index i = 0; i < k; ++i) row.push_back(pd.mu(m, i));
        append_flat(row, pd.adjusted_covariance[um]);
        append_flat(row, pd.next_covariance[um]);
        append_flat(row, pd.precision[um]);
        cov.row(m) = Eigen::Map<const RowVector>(row.data(), static_cast<Index>(row.size()));
    }
    write_numeric_table(dir / files::predictive_cov, header, cov);

    std::vector<std::string> rh{"draw"};
    for (Index i = 1; i <= k; ++i) rh.push_back("r_" + std::to_string(i));
    for (Index i = 1; i <= k; ++i) rh.push_back("e_" + std::to_string(i));
    Matrix ret(pd.returns.rows(), 1 + 2 * k);
    for (Index r = 0; r < pd.returns.rows(); ++r) {
        ret(r, 0) = static_cast<double>(pd.n_per_draw > 0 ? r / pd.n_per_draw : 0);
        ret.row(r).segment(1, k) = pd.returns.row(r);
        ret.row(r).segment(1 + k, k) = pd.errors.row(r);
    }
    write_numeric_table(dir / files::predictive_returns, rh, ret);
}

PredictiveDraws read_predictive(const fs::path& dir) {
    const fs::path cov_path = dir / files::predictive_cov;
    const NumericTable cov = read_numeric_table(cov_path);
    const Index width = cov.values.cols();
    // 2 + K + 3 K^2 columns.
    Index k = 1;
    while (2 + k + 3 * k * k < width) ++k;
    if (2 + k + 3 * k * k != width) throw DataError("schema mismatch in '" + cov_path.string() + "'");
    require_column(cov, "mu_1", cov_path);
    require_column(cov, "hstar_1_1", cov_path);
    PredictiveDraws pd;
    pd.assets = k;
    const Index m_total = cov.values.rows();
    pd.mu = cov.values.middleCols(2, k);
    for (Index m = 0; m < m_total; ++m) {
        pd.fresh.push_back(cov.values(m, 1) != 0.0);
        pd.adjusted_covariance.push_back(unflatten_square(cov.values, m, 2 + k, k));
        pd.next_covariance.push_back(unflatten_square(cov.values, m, 2 + k + k * k, k));
        pd.precision.push_back(unflatten_square(cov.values, m, 2 + k + 2 * k * k, k));
    }
    const fs::path ret_path = dir / files::predictive_returns;
    const NumericTable ret = read_numeric_table(ret_path);
    if (ret.values.cols() != 1 + 2 * k) throw DataError("schema mismatch in '" + ret_path.string() + "'");
    pd.returns = ret.values.middleCols(1, k);
    pd.errors = ret.values.middleCols(1 + k, k);
    pd.n_per_draw = m_total > 0 ? static_cast<int>(ret.values.rows() / m_total) : 0;
    return pd;
}

Json predictive_summary(const PredictiveDraws& pd) {
    const Index k = pd.assets;
    Json entries = Json::object();
    std::vector<double> buf(static_cast<std::size_t>(pd.size()));
    for (Index i = 0; i < k; ++i) {
        for (Index j = i; j < k; ++j) {
            for (Index m = 0; m < pd.size(); ++m) buf[static_cast<std::size_t>(m)] = pd.adjusted_covariance[static_cast<std::size_t>(m)](i, j);
            if (!buf.empty())
                entries["hstar_" + std::to_string(i + 1) + "_" + std::to_string(j + 1)] = to_json(summarize(buf));
        }
    }
    Json kurt = Json::array();
    Json returns = Json::object();
    for (Index i = 0; i < k; ++i) {
        std::vector<double> e(pd.errors.col(i).data(), pd.errors.col(i).data() + pd.errors.rows());
        kurt.push_back(e.size() >= 4 ? sample_kurtosis(e) : 0.0);
        std::vector<double> r(pd.returns.col(i).data(), pd.returns.col(i).data() + pd.returns.rows());
        if (!r.empty()) returns["r_" + std::to_string(i + 1)] = to_json(summarize(r));
    }
    const auto fresh = std::count(pd.fresh.begin(), pd.fresh.end(), true);
    return Json{{"draws", pd.size()},
                {"n_per_draw", pd.n_per_draw},
                {"sample_size", pd.returns.rows()},
                {"excluded", pd.excluded},
                {"fresh_components", fresh},
                {"adjusted_covariance", entries},
                {"returns", returns},
                {"error_kurtosis", kurt}};
}

Json decision_summary(const DecisionDraws& d, const std::vector<std::string>& labels) {
    auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    Json j{{"rule", to_string(d.rule)}, {"gamma", d.gamma}, {"draws", d.size()}, {"excluded", d.excluded}};
    if (d.size() == 0) return j;
    if (d.weights.rows() > 0) {
        Json w = Json::object();
        for (Index i = 0; i < d.weights.cols(); ++i) {
            const std::string name = i < static_cast<Index>(labels.size()) ? labels[static_cast<std::size_t>(i)]
                                                                            : "asset_" + std::to_string(i + 1);
            w[name] = to_json(summarize(vec(d.weights.col(i))));
        }
        j["weights"] = w;
    }
    if (d.hedge_ratio.size() > 0) j["hedge_ratio"] = to_json(summarize(vec(d.hedge_ratio)));
    j["expected_return"] = to_json(summarize(vec(d.expected)));
    j["variance"] = to_json(summarize(vec(d.variance)));
    j["utility"] = to_json(summarize(vec(d.utility)));
    if (d.contracts.size() > 0) {
        const Summary s = summarize(vec(d.contracts));
        j["contracts"] = to_json(s);
        j["contracts_recommended"] = round_contracts(s.mean);
    }
    return j;
}

void write_decision_draws(const DecisionDraws& d, const fs::path& path) {
    std::vector<std::string> header{"draw"};
    const Index nw = d.weights.rows() > 0 ? d.weights.cols() : 0;
    for (Index i = 1; i <= nw; ++i) header.push_back("p_" + std::to_string(i));
    if (d.hedge_ratio.size() > 0) header.push_back("hedge_ratio");
    header.insert(header.end(), {"expected", "variance", "utility"});
    if (d.contracts.size() > 0) header.push_back("contracts");
    Matrix t(d.size(), static_cast<Index>(header.size()));
    for (Index m = 0; m < d.size(); ++m) {
        Index c = 0;
        t(m, c++) = static_cast<double>(d.source[static_cast<std::size_t>(m)]);
        for (Index i = 0; i < nw; ++i) t(m, c++) = d.weights(m, i);
        if (d.hedge_ratio.size() > 0) t(m, c++) = d.hedge_ratio(m);
        t(m, c++) = d.expected(m);
        t(m, c++) = d.variance(m);
        t(m, c++) = d.utility(m);
        if (d.contracts.size() > 0) t(m, c++) = d.contracts(m);
    }
    write_numeric_table(path, header, t);
}

void write_density(const DensityTable& table, const fs::path& path) {
    Matrix t(static_cast<Index>(table.grid.size()), 2);
    for (std::size_t i = 0; i < table.grid.size(); ++i) {
        t(static_cast<Index>(i), 0) = table.grid[i];
        t(static_cast<Index>(i), 1) = table.density[i];
    }
    write_numeric_table(path, {"x", "density"}, t);
}

void write_path(const VolatilityPath& path, const fs::path& file) {
    const Index k = path.assets();
    std::vector<std::string> header{"t"};
    const auto h = matrix_headers("h", k);
    header.insert(header.end(), h.begin(), h.end());
    Matrix t(path.rows(), 1 + k * k);
    for (Index r = 0; r < path.rows(); ++r) {
        std::vector<double> row{static_cast<double>(r)};
        append_flat(row, path.h[static_cast<std::size_t>(r)]);
        t.row(r) = Eigen::Map<const RowVector>(row.data(), static_cast<Index>(row.size()));
    }
    write_numeric_table(file, header, t);
}

std::vector<Matrix> read_path(const fs::path& file) {
    const NumericTable t = read_numeric_table(file);
    Index k = 1;
    while (1 + k * k < t.values.cols()) ++k;
    if (1 + k * k != t.values.cols()) throw DataError("schema mismatch in '" + file.string() + "'");
    std::vector<Matrix> out;
    for (Index r = 0; r < t.values.rows(); ++r) out.push_back(unflatten_square(t.values, r, 1, k));
    return out;
}

}  // namespace dpmgarch
