#include <doctest.h>

#include <cmath>

#include "dpmgarch/mgarch.hpp"
#include "dpmgarch/simulate.hpp"
#include "dpmgarch/summary.hpp"

using namespace dpmgarch;

TEST_CASE("error specs") {
    CHECK_NOTHROW(ErrorSpec::gaussian().validate());
    CHECK_NOTHROW(ErrorSpec::two_component_mixture().validate());
    CHECK(ErrorSpec::preset("student_t").kind == ErrorKind::student_t);
    CHECK_THROWS_AS(ErrorSpec::preset("cauchy"), std::invalid_argument);
    ErrorSpec t = ErrorSpec::student_t(2, 2.0);
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    ErrorSpec m = ErrorSpec::two_component_mixture();
    m.weights(0) = 0.5;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m = ErrorSpec::two_component_mixture();
    m.covariances[1](0, 1) = 5.0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("mixture moments") {
    CHECK(mixture_moments(ErrorSpec::gaussian()).covariance == Matrix::Identity(2, 2));
    const Moments m = mixture_moments(ErrorSpec::two_component_mixture());
    CHECK(std::abs(m.covariance(0, 0) - 1.0) < 1e-12);
    CHECK(std::abs(m.covariance(1, 1) - 1.0) < 1e-12);
    CHECK(std::abs(m.covariance(0, 1) - 0.00004) < 1e-12);
    CHECK(m.mean.isZero());
    const Moments s = mixture_moments(ErrorSpec::student_t());
    CHECK((s.covariance - (8.0 / 6.0) * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(mixture_moments(ErrorSpec::student_t(2, 8.0, true)).covariance.isApprox(Matrix::Identity(2, 2)));
}

TEST_CASE("error draws have the stated covariance") {
    for (const ErrorSpec& spec : {ErrorSpec::gaussian(), ErrorSpec::student_t(), ErrorSpec::two_component_mixture()}) {
        Rng rng(31);
        const int n = 200000;
        Matrix x(n, 2);
        for (Index i = 0; i < n; ++i) x.row(i) = spec.draw(rng).transpose();
        const Matrix cov = x.transpose() * x / n;
        const Matrix truth = mixture_moments(spec).covariance;
        CHECK((cov - truth).cwiseAbs().maxCoeff() < 0.03);
    }
}

TEST_CASE("generated series") {
    const GarchParams p = GarchParams::simulation_default(Variant::scalar, 2);
    SUBCASE("shape, labels, determinism") {
        const SimulatedSeries a = generate_series(p, 3000, ErrorSpec::gaussian(), 4);
        CHECK(a.series.rows() == 3000);
        CHECK(a.series.assets() == 2);
        CHECK(a.series.labels == std::vector<std::string>{"asset_1", "asset_2"});
        CHECK(a.series.timestamps.size() == 3000);
        const SimulatedSeries b = generate_series(p, 3000, ErrorSpec::gaussian(), 4);
        CHECK(a.series.returns == b.series.returns);
        CHECK(generate_series(p, 3000, ErrorSpec::gaussian(), 5).series.returns != a.series.returns);
    }
    SUBCASE("filter at the truth reproduces the generator path") {
        for (Variant v : {Variant::scalar, Variant::vector}) {
            const GarchParams q = GarchParams::simulation_default(v, 2);
            const SimulatedSeries s = generate_series(q, 500, ErrorSpec::two_component_mixture(), 6);
            const VolatilityPath f = filter_volatilities(q, s.series.returns, s.filter_options);
            double worst = 0.0;
            for (std::size_t t = 0; t < f.h.size(); ++t)
                worst = std::max(worst, (f.h[t] - s.truth.h[t]).cwiseAbs().maxCoeff());
            CHECK(worst < 1e-12);
            CHECK((f.model_errors - s.truth.model_errors).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
    SUBCASE("intercept-only dynamics give iid returns") {
        const GarchParams flat = GarchParams::uniform(Variant::scalar, 2, 0.1, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        const SimulatedSeries s = generate_series(flat, 100000, ErrorSpec::gaussian(), 7);
        const UnconditionalMoments m = unconditional_covariance(s.series.returns);
        CHECK(std::abs(m.covariance(0, 0) / 0.5 - 1.0) < 0.02);
        CHECK(std::abs(m.covariance(1, 1) / 0.5 - 1.0) < 0.02);
        CHECK(std::abs(m.covariance(0, 1)) < 0.01);
        CHECK(std::abs(m.mean(0) - 0.1) < 0.01);
    }
    SUBCASE("student-t errors are fat tailed") {
        const SimulatedSeries s = generate_series(p, 3000, ErrorSpec::student_t(), 8);
        for (Index i = 0; i < 2; ++i) {
            const Vector e = s.truth.model_errors.col(i);
            CHECK(sample_kurtosis(std::span<const double>(e.data(), static_cast<std::size_t>(e.size()))) > 3.0);
        }
    }
    SUBCASE("invalid inputs") {
        GarchParams bad = p;
        bad.beta.setConstant(0.99);
        CHECK_THROWS_AS(generate_series(bad, 10, ErrorSpec::gaussian(), 1), std::invalid_argument);
        CHECK_THROWS_AS(generate_series(p, 0, ErrorSpec::gaussian(), 1), std::invalid_argument);
        CHECK_THROWS_AS(generate_series(p, 10, ErrorSpec::gaussian(3), 1), std::invalid_argument);
    }
    CHECK(unconditional_variance(p)(0) == doctest::Approx(0.05 / (1 - 0.05 - 0.85 - 0.05)));
}
