#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpmgarch/cli.hpp"
#include "dpmgarch/data.hpp"
#include "dpmgarch/io.hpp"
#include "dpmgarch/predictive.hpp"

using namespace dpmgarch;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("dpmgarch_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& s) const { return (path / s).string(); }
};

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("usage errors") {
    CHECK(cli({}).code == exit_usage);
    CHECK(cli({"frobnicate"}).code == exit_usage);
    CHECK(cli({"--help"}).code == exit_ok);
    TempDir d("usage");
    CHECK(cli({"simulate", "-T", "0", "--out-dir", d / "sim"}).code == exit_usage);
    CHECK_FALSE(fs::exists(d / "sim/returns.csv"));
    CHECK(cli({"simulate", "--preset", "sim-cauchy", "--out-dir", d / "sim"}).code == exit_usage);
    CHECK(cli({"estimate"}).code == exit_usage);
}

TEST_CASE("simulate preset and determinism") {
    TempDir d("simulate");
    REQUIRE(cli({"simulate", "--preset", "sim-gaussian", "--seed", "3", "--out-dir", d / "a"}).code == exit_ok);
    std::vector<std::string> first;
    for (const char* f : {"returns.csv", "truth_path.csv", "truth.json", "manifest.json"})
        first.push_back(slurp(d / (std::string("a/") + f)));
    REQUIRE(cli({"simulate", "--preset", "sim-gaussian", "--seed", "3", "--out-dir", d / "a"}).code == exit_ok);
    std::size_t i = 0;
    for (const char* f : {"returns.csv", "truth_path.csv", "truth.json", "manifest.json"})
        CHECK(slurp(d / (std::string("a/") + f)) == first[i++]);
    const ReturnSeries t = load_returns(d / "a/returns.csv");
    CHECK(t.rows() == 3000);
    CHECK(t.assets() == 2);
    const Json man = read_json(d / "a/manifest.json");
    CHECK(man["seed"] == 3);
}

TEST_CASE("missing or malformed inputs") {
    TempDir d("missing");
    CHECK(cli({"estimate", "--input", d / "nope.csv", "--out-dir", d / "run"}).code == exit_data);
    CHECK_FALSE(fs::exists(d / "run"));
    CHECK(cli({"predict", "--draws", d / "run"}).code == exit_data);
    CHECK(cli({"allocate", "--predictive", d / "run"}).code == exit_data);
    std::ofstream(d / "bad.csv") << "date,a,b\n2020-01-01,1,x\n";
    CHECK(cli({"stats", "--input", d / "bad.csv"}).code == exit_data);
    // Draw file with the wrong columns.
    fs::create_directories(d / "broken");
    std::ofstream(d / "broken/draws.csv") << "iter,foo\n1,2\n";
    std::ofstream(d / "broken/dpm_states.jsonl") << "{}\n";
    std::ofstream(d / "broken/manifest.json") << "{}\n";
    CHECK(cli({"predict", "--draws", d / "broken"}).code == exit_data);
}

TEST_CASE("end-to-end pipeline") {
    TempDir d("pipeline");
    REQUIRE(cli({"simulate", "--preset", "sim-student-t", "-T", "300", "--seed", "4", "--out-dir", d / "sim"}).code ==
            exit_ok);
    const std::vector<std::string> est{"estimate", "--input", d / "sim/returns.csv", "--burn-in", "100", "--draws", "60",
                                       "--seed", "9", "--out-dir"};
    auto with_out = [&](std::string dir) {
        auto a = est;
        a.push_back(d / dir);
        return a;
    };
    REQUIRE(cli(with_out("run")).code == exit_ok);
    REQUIRE(cli(with_out("again")).code == exit_ok);
    CHECK(slurp(d / "run/draws.csv") == slurp(d / "again/draws.csv"));
    CHECK(slurp(d / "run/dpm_states.jsonl") == slurp(d / "again/dpm_states.jsonl"));
    const Json man = read_json(d / "run/manifest.json");
    CHECK(man["mode"] == "dirichlet-process-mixture");
    CHECK(man["seed"] == 9);
    CHECK(man["cluster_trace"].size() == 60);
    CHECK(man["acceptance"]["retained"].contains("mu"));

    REQUIRE(cli({"predict", "--draws", d / "run", "--density"}).code == exit_ok);
    const PredictiveDraws pd = read_predictive(d / "run");
    CHECK(pd.returns.rows() == 300);
    CHECK(fs::exists(d / "run/predictive_summary.json"));
    CHECK(fs::exists(d / "run/predictive_density_e_1.csv"));

    REQUIRE(cli({"allocate", "--predictive", d / "run", "--gamma", "0.03", "--dump-draws"}).code == exit_ok);
    const Json alloc = read_json(d / "run/allocation.json");
    for (const char* rule : {"utility", "gmv"}) {
        CHECK(alloc[rule].contains("weights"));
        CHECK(alloc[rule].contains("expected_return"));
        CHECK(alloc[rule].contains("variance"));
        CHECK(alloc[rule].contains("utility"));
    }

    REQUIRE(cli({"hedge", "--predictive", d / "run", "--shares", "1000", "--price-portfolio", "1412",
                 "--price-futures", "1400"})
                .code == exit_ok);
    const Json hedge = read_json(d / "run/hedge.json");
    CHECK(hedge["utility"].contains("contracts"));
    CHECK(hedge["utility"].contains("contracts_recommended"));
    CHECK(hedge["gmv"]["hedge_ratio"]["count"] == 60);
}

TEST_CASE("gaussian error model is recorded") {
    TempDir d("gaussian");
    REQUIRE(cli({"simulate", "--preset", "sim-gaussian", "-T", "200", "--out-dir", d / "sim"}).code == exit_ok);
    REQUIRE(cli({"estimate", "--input", d / "sim/returns.csv", "--burn-in", "50", "--draws", "20", "--error-model",
                 "gaussian", "--out-dir", d / "run"})
                .code == exit_ok);
    CHECK(read_json(d / "run/manifest.json")["mode"] == "single-component");
}

TEST_CASE("long-only allocation on five assets") {
    TempDir d("five");
    PredictiveDraws pd;
    pd.assets = 5;
    Rng rng(2);
    const Index m = 30;
    pd.mu = Matrix(m, 5);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < 5; ++j) pd.mu(i, j) = 0.2 * rng.normal();
        Matrix a(5, 5);
        for (Index r = 0; r < 5; ++r)
            for (Index c = 0; c < 5; ++c) a(r, c) = rng.normal();
        const Matrix h = a * a.transpose() / 5.0 + 0.05 * Matrix::Identity(5, 5);
        pd.next_covariance.push_back(h);
        pd.adjusted_covariance.push_back(h);
        pd.precision.push_back(Matrix::Identity(5, 5));
        pd.fresh.push_back(false);
    }
    sample_predictive_returns(pd, 5, 3);
    write_predictive(pd, d.path);
    REQUIRE(cli({"allocate", "--predictive", d.path.string(), "--no-short", "--dump-draws"}).code == exit_ok);
    for (const char* rule : {"utility", "gmv"}) {
        const NumericTable t = read_numeric_table(d / (std::string("allocation_draws_") + rule + ".csv"));
        CHECK(t.values.rows() == m);
        for (Index j = 1; j <= 5; ++j) CHECK(t.values.col(t.column("p_" + std::to_string(j))).minCoeff() >= 0.0);
    }
    // Without the flag some weights go negative on this data.
    REQUIRE(cli({"allocate", "--predictive", d.path.string(), "--dump-draws"}).code == exit_ok);
    const NumericTable t = read_numeric_table(d / "allocation_draws_utility.csv");
    CHECK(t.values.block(0, 1, m, 5).minCoeff() < 0.0);
}

TEST_CASE("stats command") {
    TempDir d("stats");
    std::ofstream(d / "prices.csv") << "date,a,b\n2020-01-01,100,50\n2020-01-02,101,49\n2020-01-03,99,50\n";
    REQUIRE(cli({"stats", "--input", d / "prices.csv", "--prices", "--out", d / "s.json"}).code == exit_ok);
    CHECK(fs::exists(d / "s.json"));
}
