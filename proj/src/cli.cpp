#include "dpmgarch/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>

#include "dpmgarch/data.hpp"
#include "dpmgarch/decisions.hpp"
#include "dpmgarch/errors.hpp"
#include "dpmgarch/io.hpp"
#include "dpmgarch/predictive.hpp"
#include "dpmgarch/sampler.hpp"
#include "dpmgarch/simulate.hpp"

namespace dpmgarch {

namespace fs = std::filesystem;

namespace {

void require_file(const fs::path& p, const char* what) {
    if (!fs::is_regular_file(p)) throw DataError(std::string(what) + " '" + p.string() + "' does not exist");
}

void require_dir_file(const fs::path& dir, const char* name) {
    if (!fs::is_regular_file(dir / name))
        throw DataError("'" + (dir / name).string() + "' not found; run the preceding command first");
}

Json base_manifest(const std::string& command, const CLI::App& app, std::uint64_t seed) {
    // Options given on the command line or in a config file, for the active subcommand.
    const auto parsed = app.get_subcommands();
    const std::string config = parsed.empty() ? app.config_to_str(false, false) : parsed.front()->config_to_str(false, false);
    return Json{{"command", command}, {"seed", seed}, {"config", config}};
}

// --- simulate -------------------------------------------------------------

struct SimulateArgs {
    std::string preset = "sim-gaussian";
    std::string errors;
    Index observations = 3000;
    std::uint64_t seed = 1;
    bool standardized = false;
    double nu = 8.0;
    std::string variant = "scalar";
    std::string params_file;
    fs::path out_dir = "sim";
};

ErrorSpec resolve_spec(const SimulateArgs& a) {
    std::string kind = a.errors;
    if (kind.empty()) {
        if (a.preset == "sim-gaussian") kind = "gaussian";
        else if (a.preset == "sim-student-t") kind = "student_t";
        else if (a.preset == "sim-mixture") kind = "mixture";
        else throw std::invalid_argument("unknown preset '" + a.preset + "'");
    }
    ErrorSpec spec = ErrorSpec::preset(kind);
    if (spec.kind == ErrorKind::student_t) {
        spec.nu = a.nu;
        spec.standardized = a.standardized;
    }
    return spec;
}

int cmd_simulate(const SimulateArgs& a, const CLI::App& app, std::ostream& out) {
    const ErrorSpec spec = resolve_spec(a);
    GarchParams p;
    if (!a.params_file.empty()) {
        require_file(a.params_file, "parameter file");
        p = params_from_json(read_json(a.params_file));
    } else {
        p = GarchParams::simulation_default(parse_variant(a.variant), spec.dimension);
    }
    const SimulatedSeries sim = generate_series(p, a.observations, spec, a.seed);

    fs::create_directories(a.out_dir);
    write_returns(sim.series, a.out_dir / "returns.csv");
    write_path(sim.truth, a.out_dir / "truth_path.csv");
    write_json(a.out_dir / "truth.json", Json{{"params", to_json(p)},
                                              {"errors", to_json(spec)},
                                              {"filter_options", to_json(sim.filter_options)},
                                              {"observations", a.observations}});
    Json man = base_manifest("simulate", app, a.seed);
    man["preset"] = a.preset;
    man["errors"] = to_json(spec);
    man["observations"] = a.observations;
    man["outputs"] = {"returns.csv", "truth.json", "truth_path.csv"};
    write_json(a.out_dir / "manifest.json", man);
    out << "wrote " << a.observations << " x " << p.assets() << " returns to " << (a.out_dir / "returns.csv").string()
        << '\n';
    return exit_ok;
}

// --- estimate -------------------------------------------------------------

struct EstimateArgs {
    fs::path input;
    bool prices = false;
    fs::path out_dir = "run";
    McmcConfig cfg;
    std::string variant = "scalar";
    std::string error_model = "dpm";
    int chains = 1;
    bool no_ml_start = false;
    bool no_learn = false;
    bool fixed_target = false;
    std::optional<double> df;
    double a0 = 2.0;
    double b0 = 2.0;
    std::string cluster_count = "occupied";
};

ReturnSeries load_input(const fs::path& input, bool prices) {
    require_file(input, "input file");
    if (prices) return to_log_returns(load_prices(input));
    return load_returns(input);
}

int cmd_estimate(EstimateArgs a, const CLI::App& app, std::ostream& out) {
    const ReturnSeries series = load_input(a.input, a.prices);
    McmcConfig cfg = a.cfg;
    cfg.variant = parse_variant(a.variant);
    cfg.error_model = parse_error_model(a.error_model);
    cfg.ml_start = !a.no_ml_start;
    cfg.learn_covariance = !a.no_learn;
    cfg.refresh_target = !a.fixed_target;
    DpmHyper hyper = a.df ? DpmHyper::with_df(series.assets(), *a.df) : DpmHyper::defaults(series.assets());
    hyper.a0 = a.a0;
    hyper.b0 = a.b0;
    hyper.concentration_count = a.cluster_count == "max_label" ? ClusterCount::max_label : ClusterCount::occupied;
    hyper.validate();
    cfg.hyper = hyper;
    cfg.validate();
    if (a.chains < 1) throw std::invalid_argument("--chains must be at least 1");

    const PosteriorDraws d = run_mcmc_chains(cfg, series.returns, a.chains);

    fs::create_directories(a.out_dir);
    write_draws(d, a.out_dir);
    Json man = estimate_manifest(d, cfg);
    man["config"] = app.config_to_str(true, false);
    man["input"] = fs::absolute(a.input).string();
    man["labels"] = series.labels;
    write_json(a.out_dir / files::manifest, man);

    Json summary = Json::object();
    for (const auto& ps : summarize_draws(d)) summary[ps.name] = to_json(ps.summary);
    write_json(a.out_dir / "posterior_summary.json", summary);

    out << "retained " << d.size() << " draws in " << d.wall_seconds << " s; acceptance:";
    for (const auto& b : d.retained_stats) out << ' ' << b.name << '=' << b.acceptance();
    out << '\n';
    return exit_ok;
}

// --- predict --------------------------------------------------------------

struct PredictArgs {
    fs::path draws_dir = "run";
    std::optional<fs::path> out_dir;
    int n_per_draw = 5;
    std::optional<std::uint64_t> seed;
    std::string scheme = "collection";
    bool density = false;
    double grid_lower = -6.0;
    double grid_upper = 6.0;
    int grid_points = 241;
};

int cmd_predict(const PredictArgs& a, const CLI::App& app, std::ostream& out) {
    require_dir_file(a.draws_dir, files::manifest);
    require_dir_file(a.draws_dir, files::draws);
    require_dir_file(a.draws_dir, files::states);
    if (a.n_per_draw < 0) throw std::invalid_argument("--n-per-draw must be non-negative");
    const PosteriorDraws d = read_draws(a.draws_dir);
    PredictiveOptions opts;
    opts.n_per_draw = a.n_per_draw;
    opts.seed = a.seed.value_or(d.seed);
    if (a.scheme == "single") opts.scheme = PredictiveScheme::single;
    else if (a.scheme != "collection") throw std::invalid_argument("--scheme must be collection or single");
    const PredictiveDraws pd = predictive_from_posterior(d, opts);

    const fs::path dir = a.out_dir.value_or(a.draws_dir);
    std::vector<std::pair<std::string, DensityTable>> densities;
    if (a.density && pd.errors.rows() > 1) {
        DensityGrid grid{a.grid_lower, a.grid_upper, a.grid_points, 0.0};
        for (Index i = 0; i < pd.assets; ++i) {
            std::vector<double> e(pd.errors.col(i).data(), pd.errors.col(i).data() + pd.errors.rows());
            densities.emplace_back("e_" + std::to_string(i + 1), density_export(e, grid));
        }
    }
    fs::create_directories(dir);
    write_predictive(pd, dir);
    Json summary = predictive_summary(pd);
    Json dens = Json::object();
    for (const auto& [name, table] : densities) {
        const std::string file = "predictive_density_" + name + ".csv";
        write_density(table, dir / file);
        Json q = Json::array();
        for (const auto& [p, v] : table.quantiles) q.push_back({p, v});
        dens[name] = {{"file", file}, {"bandwidth", table.bandwidth}, {"quantiles", q}};
    }
    if (!densities.empty()) summary["densities"] = dens;
    write_json(dir / files::predictive_summary, summary);
    Json man = base_manifest("predict", app, opts.seed);
    man["draws_dir"] = fs::absolute(a.draws_dir).string();
    write_json(dir / "predict_manifest.json", man);
    out << "predictive sample of " << pd.returns.rows() << " returns from " << pd.size() << " draws\n";
    return exit_ok;
}

// --- allocate / hedge -----------------------------------------------------

struct DecisionArgs {
    fs::path predictive_dir = "run";
    std::optional<fs::path> out_dir;
    DecisionConfig cfg;
    std::string rule = "both";
    bool no_short = false;
    bool dump = false;
    std::vector<std::string> labels;
};

std::vector<Rule> rules_of(const std::string& s) {
    if (s == "both") return {Rule::utility, Rule::gmv};
    return {parse_rule(s)};
}

std::vector<std::string> run_labels(const fs::path& dir, const std::vector<std::string>& given) {
    if (!given.empty()) return given;
    if (fs::is_regular_file(dir / files::manifest)) {
        const Json man = read_json(dir / files::manifest);
        if (man.contains("labels")) return man["labels"].get<std::vector<std::string>>();
    }
    return {};
}

int cmd_allocate(const DecisionArgs& a, const CLI::App& app, std::ostream& out) {
    require_dir_file(a.predictive_dir, files::predictive_cov);
    require_dir_file(a.predictive_dir, files::predictive_returns);
    const PredictiveDraws pd = read_predictive(a.predictive_dir);
    const auto labels = run_labels(a.predictive_dir, a.labels);
    Json report = Json::object();
    std::vector<std::pair<std::string, DecisionDraws>> all;
    for (Rule r : rules_of(a.rule)) {
        DecisionConfig cfg = a.cfg;
        cfg.rule = r;
        cfg.short_sale_allowed = !a.no_short;
        DecisionDraws d = posterior_weights(pd, cfg);
        Json j = decision_summary(d, labels);
        if (pd.returns.rows() > pd.assets) {
            Vector point = predictive_point_weights(pd.returns, cfg);
            j["predictive_point_weights"] = to_json(point);
        }
        report[to_string(r)] = j;
        all.emplace_back(to_string(r), std::move(d));
    }
    report["short_sale_allowed"] = !a.no_short;
    const fs::path dir = a.out_dir.value_or(a.predictive_dir);
    fs::create_directories(dir);
    write_json(dir / files::allocation, report);
    if (a.dump)
        for (const auto& [name, d] : all) write_decision_draws(d, dir / ("allocation_draws_" + name + ".csv"));
    write_json(dir / "allocate_manifest.json", base_manifest("allocate", app, 0));
    out << report.dump(2) << '\n';
    return exit_ok;
}

int cmd_hedge(const DecisionArgs& a, const CLI::App& app, std::ostream& out) {
    require_dir_file(a.predictive_dir, files::predictive_cov);
    require_dir_file(a.predictive_dir, files::predictive_returns);
    const PredictiveDraws pd = read_predictive(a.predictive_dir);
    if (pd.assets != 2) throw std::invalid_argument("hedge needs a two-asset (portfolio, futures) run");
    const bool with_contracts = a.cfg.price_portfolio > 0.0 && a.cfg.price_futures > 0.0;
    Json report = Json::object();
    std::vector<std::pair<std::string, DecisionDraws>> all;
    for (Rule r : rules_of(a.rule)) {
        DecisionConfig cfg = a.cfg;
        cfg.rule = r;
        DecisionDraws d = hedge_ratios(pd, cfg);
        if (with_contracts) {
            // One predictive return per draw: the first of its block.
            Vector rp(d.size()), rf(d.size());
            for (Index m = 0; m < d.size(); ++m) {
                const Index src = d.source[static_cast<std::size_t>(m)];
                if (pd.n_per_draw > 0) {
                    rp(m) = pd.returns(src * pd.n_per_draw, 0);
                    rf(m) = pd.returns(src * pd.n_per_draw, 1);
                } else {
                    rp(m) = rf(m) = 0.0;
                }
            }
            d.contracts = futures_contracts(d.hedge_ratio, rp, rf, cfg);
        }
        report[to_string(r)] = decision_summary(d, {});
        all.emplace_back(to_string(r), std::move(d));
    }
    report["shares"] = a.cfg.shares;
    report["multiplier"] = a.cfg.multiplier;
    if (with_contracts) {
        report["price_portfolio"] = a.cfg.price_portfolio;
        report["price_futures"] = a.cfg.price_futures;
    }
    const fs::path dir = a.out_dir.value_or(a.predictive_dir);
    fs::create_directories(dir);
    write_json(dir / files::hedge, report);
    if (a.dump)
        for (const auto& [name, d] : all) write_decision_draws(d, dir / ("hedge_draws_" + name + ".csv"));
    write_json(dir / "hedge_manifest.json", base_manifest("hedge", app, 0));
    out << report.dump(2) << '\n';
    return exit_ok;
}

// --- stats ----------------------------------------------------------------

struct StatsArgs {
    fs::path input;
    bool prices = false;
    std::optional<fs::path> out;
};

int cmd_stats(const StatsArgs& a, const CLI::App& app, std::ostream& out) {
    const ReturnSeries r = load_input(a.input, a.prices);
    const StatsTable t = descriptive_stats(r);
    out << format_stats_text(t);
    if (r.dropped_rows > 0) out << "dropped rows with missing values: " << r.dropped_rows << '\n';
    if (a.out) {
        Json j = to_json(t);
        j["observations"] = r.rows();
        j["dropped_rows"] = r.dropped_rows;
        write_json(*a.out, j);
        fs::path man = *a.out;
        man.replace_extension(".manifest.json");
        write_json(man, base_manifest("stats", app, 0));
    }
    return exit_ok;
}

void add_decision_options(CLI::App* sub, DecisionArgs& a) {
    sub->add_option("--predictive", a.predictive_dir, "Directory holding predictive_cov.csv and predictive_returns.csv");
    sub->add_option("--out-dir", a.out_dir, "Output directory (default: the predictive directory)");
    sub->add_option("--gamma", a.cfg.gamma, "Risk aversion")->check(CLI::PositiveNumber);
    sub->add_option("--rule", a.rule, "utility, gmv or both")->check(CLI::IsMember({"utility", "gmv", "both"}));
    sub->add_flag("--dump-draws", a.dump, "Also write per-draw decisions");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayesian semiparametric multivariate GARCH: estimation, prediction and decisions", "dpmgarch"};
    app.set_config("--config", "", "TOML/INI configuration file; command-line flags take precedence");
    app.require_subcommand(1, 1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Generate a synthetic bivariate series");
    s->add_option("--preset", sim.preset, "sim-gaussian, sim-student-t or sim-mixture")
        ->check(CLI::IsMember({"sim-gaussian", "sim-student-t", "sim-mixture"}));
    s->add_option("--errors", sim.errors, "Override the error law: gaussian, student_t or mixture")
        ->check(CLI::IsMember({"gaussian", "student_t", "mixture"}));
    s->add_option("-T,--observations", sim.observations, "Series length")->check(CLI::PositiveNumber);
    s->add_option("--seed", sim.seed, "Root seed");
    s->add_option("--nu", sim.nu, "Student-t degrees of freedom")->check(CLI::Range(2.0001, 1e6));
    s->add_flag("--standardized", sim.standardized, "Scale Student-t errors to unit covariance");
    s->add_option("--variant", sim.variant, "scalar or vector")->check(CLI::IsMember({"scalar", "vector"}));
    s->add_option("--params", sim.params_file, "JSON file with generating parameters");
    s->add_option("--out-dir", sim.out_dir, "Output directory");

    EstimateArgs est;
    auto* e = app.add_subcommand("estimate", "Run the MCMC sampler");
    e->add_option("--input", est.input, "Returns file (or prices with --prices)")->required();
    e->add_flag("--prices", est.prices, "Input holds prices; convert to percent log-returns");
    e->add_option("--out-dir", est.out_dir, "Output directory");
    e->add_option("--burn-in", est.cfg.burn_in, "Burn-in iterations")->check(CLI::NonNegativeNumber);
    e->add_option("--draws", est.cfg.draws, "Retained iterations before thinning")->check(CLI::PositiveNumber);
    e->add_option("--thin", est.cfg.thin, "Thinning interval")->check(CLI::PositiveNumber);
    e->add_option("--seed", est.cfg.seed, "Root seed");
    e->add_option("--variant", est.variant, "scalar or vector")->check(CLI::IsMember({"scalar", "vector"}));
    e->add_option("--error-model", est.error_model, "dpm or gaussian")->check(CLI::IsMember({"dpm", "gaussian"}));
    e->add_option("--chains", est.chains, "Independent chains, merged in order")->check(CLI::PositiveNumber);
    e->add_option("--df", est.df, "Wishart base df (shifted convention)");
    e->add_option("--a0", est.a0, "Concentration prior shape")->check(CLI::PositiveNumber);
    e->add_option("--b0", est.b0, "Concentration prior rate")->check(CLI::PositiveNumber);
    e->add_option("--cluster-count", est.cluster_count, "Count used in the concentration update: occupied or max_label")
        ->check(CLI::IsMember({"occupied", "max_label"}));
    e->add_option("--adapt-window", est.cfg.adapt_window, "Iterations between scale updates")->check(CLI::PositiveNumber);
    e->add_option("--max-numeric-failures", est.cfg.max_numeric_failures, "Abort threshold for filter failures");
    e->add_flag("--no-ml-start", est.no_ml_start, "Start from default values instead of the Gaussian ML fit");
    e->add_flag("--no-learn-covariance", est.no_learn, "Keep diagonal proposal shapes");
    e->add_flag("--fixed-target", est.fixed_target, "Hold the correlation target at its starting value");

    PredictArgs pred;
    auto* p = app.add_subcommand("predict", "One-step-ahead predictive sampling");
    p->add_option("--draws", pred.draws_dir, "Estimation output directory");
    p->add_option("--out-dir", pred.out_dir, "Output directory (default: the draws directory)");
    p->add_option("--n-per-draw", pred.n_per_draw, "Returns sampled per retained draw")->check(CLI::NonNegativeNumber);
    p->add_option("--seed", pred.seed, "Root seed (default: the estimation seed)");
    p->add_option("--scheme", pred.scheme, "collection or single")->check(CLI::IsMember({"collection", "single"}));
    p->add_flag("--density", pred.density, "Write kernel density tables of the predictive errors");
    p->add_option("--grid-lower", pred.grid_lower, "Density grid lower end");
    p->add_option("--grid-upper", pred.grid_upper, "Density grid upper end");
    p->add_option("--grid-points", pred.grid_points, "Density grid size")->check(CLI::PositiveNumber);

    DecisionArgs alloc;
    auto* al = app.add_subcommand("allocate", "Posterior portfolio weights");
    add_decision_options(al, alloc);
    al->add_flag("--no-short", alloc.no_short, "Long-only weights");
    al->add_option("--labels", alloc.labels, "Asset labels for the report");

    DecisionArgs hedge;
    hedge.cfg = DecisionConfig::hedging();
    auto* h = app.add_subcommand("hedge", "Hedge ratios and futures contracts");
    add_decision_options(h, hedge);
    h->add_option("--shares", hedge.cfg.shares, "Shares held")->check(CLI::NonNegativeNumber);
    h->add_option("--multiplier", hedge.cfg.multiplier, "Contract multiplier")->check(CLI::PositiveNumber);
    h->add_option("--price-portfolio", hedge.cfg.price_portfolio, "Current portfolio price")->check(CLI::PositiveNumber);
    h->add_option("--price-futures", hedge.cfg.price_futures, "Current futures price")->check(CLI::PositiveNumber);

    StatsArgs st;
    auto* sts = app.add_subcommand("stats", "Descriptive statistics of a return or price file");
    sts->add_option("--input", st.input, "Returns file (or prices with --prices)")->required();
    sts->add_flag("--prices", st.prices, "Input holds prices");
    sts->add_option("--out", st.out, "JSON output file");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (s->parsed()) return cmd_simulate(sim, app, out);
        if (e->parsed()) return cmd_estimate(est, app, out);
        if (p->parsed()) return cmd_predict(pred, app, out);
        if (al->parsed()) return cmd_allocate(alloc, app, out);
        if (h->parsed()) return cmd_hedge(hedge, app, out);
        if (sts->parsed()) return cmd_stats(st, app, out);
    } catch (const DataError& ex) {
        err << "data error: " << ex.what() << '\n';
        return exit_data;
    } catch (const NumericError& ex) {
        err << "numeric failure: " << ex.what() << '\n';
        return exit_numeric;
    } catch (const std::invalid_argument& ex) {
        err << "usage error: " << ex.what() << '\n';
        return exit_usage;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return exit_failure;
    }
    return exit_usage;
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace dpmgarch
