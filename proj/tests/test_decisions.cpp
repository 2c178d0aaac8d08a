#include <doctest.h>

#include <cmath>
#include <limits>

#include "dpmgarch/decisions.hpp"
#include "dpmgarch/errors.hpp"

using namespace dpmgarch;

namespace {

DecisionConfig rule_config(Rule r, double gamma = 0.03) {
    DecisionConfig c;
    c.rule = r;
    c.gamma = gamma;
    return c;
}

Matrix random_spd(Rng& rng, Index k) {
    Matrix a(k, k);
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < k; ++j) a(i, j) = rng.normal();
    return a * a.transpose() / static_cast<double>(k) + 0.1 * Matrix::Identity(k, k);
}

// Minimum objective over a simplex grid with step 1/n.
double grid_minimum(const Vector& mu, const Matrix& s, const DecisionConfig& cfg, int n) {
    const Index k = s.rows();
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> c(static_cast<std::size_t>(k), 0);
    std::function<void(Index, int)> rec = [&](Index i, int left) {
        if (i == k - 1) {
            c[static_cast<std::size_t>(i)] = left;
            Vector p(k);
            for (Index j = 0; j < k; ++j) p(j) = c[static_cast<std::size_t>(j)] / static_cast<double>(n);
            best = std::min(best, portfolio_objective(p, mu, s, cfg));
            return;
        }
        for (int v = 0; v <= left; ++v) {
            c[static_cast<std::size_t>(i)] = v;
            rec(i + 1, left - v);
        }
    };
    rec(0, n);
    return best;
}

}  // namespace

TEST_CASE("config") {
    CHECK(DecisionConfig{}.gamma == 0.03);
    CHECK(DecisionConfig::hedging().gamma == 0.3);
    CHECK(DecisionConfig{}.multiplier == 50.0);
    DecisionConfig c;
    c.gamma = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = DecisionConfig{};
    c.multiplier = -1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK(parse_rule("gmv") == Rule::gmv);
    CHECK_THROWS_AS(parse_rule("sharpe"), std::invalid_argument);
}

TEST_CASE("closed-form weights") {
    SUBCASE("symmetric case") {
        for (Rule r : {Rule::utility, Rule::gmv}) {
            const Vector p = static_weights(Vector::Zero(3), Matrix::Identity(3, 3), rule_config(r, 0.7));
            CHECK((p.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
        }
    }
    SUBCASE("diagonal gmv") {
        const Vector p = static_weights(Vector::Zero(2), Eigen::Vector2d(1, 4).asDiagonal(), rule_config(Rule::gmv));
        CHECK(p(0) == doctest::Approx(0.8));
        CHECK(p(1) == doctest::Approx(0.2));
    }
    SUBCASE("constant-model moments") {
        Matrix s(2, 2);
        s << 9.7482, 2.9805, 2.9805, 3.1537;
        const Vector mu = Eigen::Vector2d(0.0973, 0.0020);
        const Vector pu = static_weights(mu, s, rule_config(Rule::utility));
        const Vector pg = static_weights(mu, s, rule_config(Rule::gmv));
        CHECK(std::abs(pu(0) - 0.4825) < 0.0005);
        CHECK(std::abs(pg(0) - 0.0249) < 0.0005);
        // Independent K = 2 formula.
        const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(0, 1);
        const double g0 = (s(1, 1) - s(0, 1)) / (s(0, 0) + s(1, 1) - 2 * s(0, 1));
        CHECK(std::abs(pg(0) - g0) < 1e-14);
        const double a = (s(1, 1) * mu(0) - s(0, 1) * mu(1)) / det, b = (s(0, 0) * mu(1) - s(0, 1) * mu(0)) / det;
        const double i0 = (s(1, 1) - s(0, 1)) / det, isum = (s(0, 0) + s(1, 1) - 2 * s(0, 1)) / det;
        CHECK(std::abs(pu(0) - (a - ((a + b - 0.03) / isum) * i0) / 0.03) < 1e-12);
    }
    SUBCASE("singular covariance") {
        CHECK_THROWS_AS(static_weights(Vector::Zero(2), Matrix::Ones(2, 2), rule_config(Rule::gmv)), NumericError);
    }
}

TEST_CASE("long-only weights") {
    SUBCASE("inactive constraints") {
        Matrix s(3, 3);
        s << 1.0, 0.2, 0.1, 0.2, 1.5, 0.3, 0.1, 0.3, 2.0;
        for (Rule r : {Rule::utility, Rule::gmv}) {
            const ConstrainedSolution c = constrained_weights(Vector::Constant(3, 0.01), s, rule_config(r));
            CHECK((c.weights - static_weights(Vector::Constant(3, 0.01), s, rule_config(r))).cwiseAbs().maxCoeff() < 1e-8);
            CHECK(c.method == "closed-form");
        }
    }
    SUBCASE("two-asset clamp") {
        Matrix s(2, 2);
        s << 9.7482, 3.3, 3.3, 3.1537;  // unconstrained gmv weight on asset 1 is negative
        const Vector free = static_weights(Vector::Zero(2), s, rule_config(Rule::gmv));
        REQUIRE(free(0) < 0.0);
        const ConstrainedSolution c = constrained_weights(Vector::Zero(2), s, rule_config(Rule::gmv));
        CHECK(c.method == "clamp");
        CHECK(c.weights(0) == 0.0);
        CHECK(c.weights(1) == 1.0);
        CHECK(c.kkt_residual < 1e-10);
    }
    SUBCASE("random problems against a simplex grid") {
        Rng rng(5);
        for (Index k = 2; k <= 5; ++k) {
            for (int rep = 0; rep < 6; ++rep) {
                const Matrix s = random_spd(rng, k);
                Vector mu(k);
                for (Index i = 0; i < k; ++i) mu(i) = 0.05 * rng.normal();
                for (Rule r : {Rule::utility, Rule::gmv}) {
                    const DecisionConfig cfg = rule_config(r, 0.5);
                    const ConstrainedSolution c = constrained_weights(mu, s, cfg);
                    CHECK(c.converged);
                    CHECK(c.weights.minCoeff() >= 0.0);
                    CHECK(std::abs(c.weights.sum() - 1.0) < 1e-10);
                    const int n = k <= 3 ? 200 : (k == 4 ? 60 : 30);
                    const double obj = portfolio_objective(c.weights, mu, s, cfg);
                    CHECK(obj <= grid_minimum(mu, s, cfg, n) + 1e-12);
                    CHECK(obj >= grid_minimum(mu, s, cfg, n) - 1e-3);
                    CHECK(obj >= portfolio_objective(static_weights(mu, s, cfg), mu, s, cfg) - 1e-12);
                }
            }
        }
    }
}

TEST_CASE("simplex projection") {
    const Vector p = project_simplex(Eigen::Vector3d(0.5, 0.9, -1.0));
    CHECK(p.sum() == doctest::Approx(1.0));
    CHECK(p(2) == 0.0);
    CHECK(p(0) == doctest::Approx(0.3));
    const Vector q = project_simplex(Eigen::Vector3d(0.2, 0.3, 0.5));
    CHECK((q - Eigen::Vector3d(0.2, 0.3, 0.5)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("posterior weights") {
    Matrix s(2, 2);
    s << 2.0, 0.3, 0.3, 1.0;
    Matrix s2(2, 2);
    s2 << 1.0, -0.2, -0.2, 3.0;
    const DecisionConfig cfg = rule_config(Rule::utility, 0.3);
    SUBCASE("identical draws") {
        Matrix mu(3, 2);
        mu.rowwise() = Eigen::RowVector2d(0.1, 0.05);
        const std::vector<Matrix> covs(3, s);
        const DecisionDraws d = posterior_weights(mu, covs, cfg);
        const Vector p = static_weights(mu.row(0).transpose(), s, cfg);
        for (Index m = 0; m < 3; ++m) CHECK((d.weights.row(m).transpose() - p).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("two hand-built draws") {
        Matrix mu(2, 2);
        mu << 0.1, 0.05, -0.02, 0.04;
        const std::vector<Matrix> covs{s, s2};
        const DecisionDraws d = posterior_weights(mu, covs, cfg);
        const Vector p1 = static_weights(mu.row(0).transpose(), s, cfg);
        const Vector p2 = static_weights(mu.row(1).transpose(), s2, cfg);
        CHECK(std::abs(d.weights.col(0).mean() - 0.5 * (p1(0) + p2(0))) < 1e-12);
        CHECK(std::abs(d.expected(0) - p1.dot(mu.row(0).transpose())) < 1e-15);
        CHECK(std::abs(d.variance(1) - p2.dot(s2 * p2)) < 1e-15);
        CHECK(std::abs(d.utility(1) - (d.expected(1) - 0.15 * d.variance(1))) < 1e-15);
    }
    SUBCASE("zero means give gmv weights") {
        const Matrix mu = Matrix::Zero(2, 2);
        const std::vector<Matrix> covs{s, s2};
        const DecisionDraws u = posterior_weights(mu, covs, cfg);
        const DecisionDraws g = posterior_weights(mu, covs, rule_config(Rule::gmv));
        CHECK((u.weights - g.weights).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("non-PD draw excluded") {
        const Matrix mu = Matrix::Zero(2, 2);
        const std::vector<Matrix> covs{s, Matrix::Ones(2, 2)};
        const DecisionDraws d = posterior_weights(mu, covs, cfg);
        CHECK(d.size() == 1);
        CHECK(d.excluded == 1);
        CHECK(d.source == std::vector<Index>{0});
    }
}

TEST_CASE("predictive point weights") {
    SUBCASE("mean zero, identity covariance") {
        Matrix x(4, 2);
        x << 1, 1, -1, -1, 1, -1, -1, 1;
        const Vector p = predictive_point_weights(x, rule_config(Rule::utility));
        CHECK(std::abs(p(0) - 0.5) < 1e-12);
    }
    SUBCASE("moment closed form and direct maximisation") {
        Rng rng(6);
        Matrix x(500, 2);
        for (Index t = 0; t < x.rows(); ++t) x.row(t) = Eigen::RowVector2d(0.2 + rng.normal(), 0.1 + 2 * rng.normal());
        const DecisionConfig cfg = rule_config(Rule::utility, 0.3);
        const Vector p = predictive_point_weights(x, cfg);
        const Vector mean = x.colwise().mean().transpose();
        const Matrix c = x.rowwise() - mean.transpose();
        const Matrix cov = c.transpose() * c / 500.0;
        CHECK((p - static_weights(mean, cov, cfg)).cwiseAbs().maxCoeff() < 1e-8);
        // Sample-average utility on a fine line search over p1.
        auto avg_utility = [&](double w) {
            const Vector q = Eigen::Vector2d(w, 1 - w);
            const Vector pr = x * q;
            const double m = pr.mean();
            return m - 0.15 * (pr.array() - m).square().mean();
        };
        double best = -1e300, arg = 0;
        for (double w = -2; w <= 2; w += 1e-5)
            if (avg_utility(w) > best) {
                best = avg_utility(w);
                arg = w;
            }
        CHECK(std::abs(arg - p(0)) < 2e-5);
    }
    SUBCASE("degenerate samples") {
        CHECK_THROWS_AS(predictive_point_weights(Matrix::Ones(1, 2), rule_config(Rule::gmv)), NumericError);
        CHECK_THROWS_AS(predictive_point_weights(Matrix(0, 2), rule_config(Rule::gmv)), std::invalid_argument);
    }
}

TEST_CASE("hedge ratios") {
    DecisionConfig u = DecisionConfig::hedging();
    DecisionConfig g = DecisionConfig::hedging();
    g.rule = Rule::gmv;
    CHECK(std::abs(hedge_ratio(1.8712, 1.8805, -0.0023, g) - 0.9950) < 0.0005);
    CHECK(std::abs(hedge_ratio(1.8712, 1.8805, -0.0023, u) - 0.9992) < 0.0005);
    CHECK(hedge_ratio(1.8712, 1.8805, -0.0023, u) == doctest::Approx((0.3 * 1.8712 + 0.0023) / (0.3 * 1.8805)));
    CHECK(hedge_ratio(0.7, 1.3, 0.0, u) == hedge_ratio(0.7, 1.3, 0.0, g));

    Matrix mu(2, 2);
    mu << 0.05, 0.02, 0.01, -0.03;
    Matrix h1(2, 2), h2(2, 2);
    h1 << 2.0, 1.5, 1.5, 1.8;
    h2 << 1.0, 0.9, 0.9, 1.1;
    const std::vector<Matrix> covs{h1, h2};
    const DecisionDraws d = hedge_ratios(mu, covs, u);
    REQUIRE(d.size() == 2);
    CHECK(d.hedge_ratio(1) == doctest::Approx((0.3 * 0.9 + 0.03) / (0.3 * 1.1)));
    const HedgedMoments hm = hedged_moments(d.hedge_ratio(0), mu.row(0).transpose(), h1);
    CHECK(d.expected(0) == hm.expected);
    CHECK(d.variance(0) == hm.variance);
    CHECK(d.variance.minCoeff() >= 0.0);
    CHECK_THROWS_AS(hedge_ratios(Matrix::Zero(1, 3), std::vector<Matrix>{Matrix::Identity(3, 3)}, u),
                    std::invalid_argument);
}

TEST_CASE("futures contracts") {
    DecisionConfig c = DecisionConfig::hedging();
    c.price_portfolio = 1412;
    c.price_futures = 1400;
    const double n = futures_contracts(0.9950, 0.0, 0.0, c);
    CHECK(n == doctest::Approx(0.9950 * 20.0 * 1412.0 / 1400.0).epsilon(1e-14));
    CHECK(std::abs(n - 20.0715) < 0.05);
    DecisionConfig unit = c;
    unit.shares = 50;
    unit.price_portfolio = unit.price_futures = 10;
    CHECK(futures_contracts(1.0, 0.0, 0.0, unit) == doctest::Approx(1.0));
    Rng rng(7);
    Vector d(100), rp(100), rf(100);
    for (Index i = 0; i < 100; ++i) {
        d(i) = 1 + 0.1 * rng.normal();
        rp(i) = rng.normal();
        rf(i) = rng.normal();
    }
    const Vector all = futures_contracts(d, rp, rf, c);
    for (Index i = 0; i < 100; ++i) CHECK(all(i) == futures_contracts(d(i), rp(i), rf(i), c));
    CHECK(round_contracts(20.5) == 21);
    CHECK(round_contracts(-2.5) == -3);
    CHECK(round_contracts(20.07) == 20);
    DecisionConfig bad = c;
    bad.price_futures = 0;
    CHECK_THROWS_AS(futures_contracts(1.0, 0.0, 0.0, bad), std::invalid_argument);
}

TEST_CASE("gmv invariance to covariance scaling") {
    Rng rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        const Index k = 2 + rep % 4;
        const Matrix s = random_spd(rng, k);
        const double c = std::exp(2 * rng.normal());
        const DecisionConfig g = rule_config(Rule::gmv);
        CHECK((static_weights(Vector::Zero(k), s, g) - static_weights(Vector::Zero(k), c * s, g)).cwiseAbs().maxCoeff() <
              1e-10);
    }
}
