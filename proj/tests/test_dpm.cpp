#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "dpmgarch/dpm.hpp"
#include "dpmgarch/errors.hpp"
#include "oracles.hpp"

using namespace dpmgarch;

namespace {

DpmState two_component_state(const Matrix& l1, const Matrix& l2, double v1, double v2) {
    DpmState s;
    s.sticks = Eigen::Vector2d(v1, v2);
    s.weights = stick_breaking_weights(s.sticks);
    s.precisions = {l1, l2};
    s.allocation = {0, 1};
    s.refresh_counts();
    return s;
}

}  // namespace

TEST_CASE("stick breaking weights") {
    const Vector w = stick_breaking_weights(Eigen::Vector3d(0.5, 0.4, 0.9));
    CHECK(w(0) == doctest::Approx(0.5));
    CHECK(w(1) == doctest::Approx(0.2));
    CHECK(w(2) == doctest::Approx(0.27));
}

TEST_CASE("concentration mixture weight") {
    const double pi = concentration_mixture_weight(2.0, 4.0, 3, 100, 0.5);
    CHECK(pi == doctest::Approx(4.0 / (4.0 + 100.0 * (4.0 + std::log(2.0)))).epsilon(1e-14));
    CHECK(pi == doctest::Approx(0.0084510).epsilon(1e-6));
    // a0 + z* - 1 = 0: all mass on the first Gamma.
    CHECK(concentration_mixture_weight(0.5, 1.0, 0, 10, 0.3) == 1.0);
    CHECK(concentration_mixture_weight(1.0, 2.0, 1, 50, 0.4) ==
          doctest::Approx(1.0 / (1.0 + 50.0 * (2.0 - std::log(0.4)))));
}

TEST_CASE("concentration draws follow the two-Gamma mixture") {
    const double a0 = 2, b0 = 4, xi = 0.5;
    const int zstar = 3;
    const std::size_t n = 100;
    Rng rng(99);
    const int m = 100000;
    std::vector<double> draws(m);
    for (auto& d : draws) d = sample_concentration_given_aux(a0, b0, zstar, n, xi, rng);
    std::sort(draws.begin(), draws.end());
    const double pi = concentration_mixture_weight(a0, b0, zstar, n, xi);
    const double rate = b0 - std::log(xi);
    double ks = 0.0;
    for (int i = 0; i < m; ++i) {
        const double x = draws[static_cast<std::size_t>(i)] * rate;
        const double cdf = pi * boost::math::gamma_p(a0 + zstar, x) + (1 - pi) * boost::math::gamma_p(a0 + zstar - 1, x);
        ks = std::max({ks, std::abs(cdf - static_cast<double>(i) / m), std::abs(cdf - static_cast<double>(i + 1) / m)});
    }
    CHECK(ks < 0.01);
}

TEST_CASE("stick weights given counts") {
    SUBCASE("single component") {
        DpmState s = initial_dpm_state(20, 2);
        Rng rng(1);
        double mean = 0.0;
        for (int i = 0; i < 20000; ++i) {
            sample_stick_weights(s, rng);
            CHECK(s.sticks.size() == 1);
            CHECK(s.weights(0) == s.sticks(0));
            mean += s.sticks(0);
        }
        CHECK(mean / 20000 == doctest::Approx(21.0 / 22.0).epsilon(2e-3));  // B(21, 1)
    }
    SUBCASE("two components n = (3, 2)") {
        DpmState s = initial_dpm_state(5, 1);
        s.allocation = {0, 0, 0, 1, 1};
        s.precisions.push_back(Matrix::Identity(1, 1));
        s.sticks = Eigen::Vector2d(0.5, 0.5);
        s.weights = stick_breaking_weights(s.sticks);
        s.concentration = 1.0;
        s.refresh_counts();
        Rng rng(2);
        double m1 = 0, m2 = 0;
        const int reps = 40000;
        for (int i = 0; i < reps; ++i) {
            sample_stick_weights(s, rng);
            CHECK(s.weights(1) == doctest::Approx((1 - s.sticks(0)) * s.sticks(1)));
            CHECK(s.weights.minCoeff() > 0.0);
            CHECK(s.weights.sum() < 1.0);
            m1 += s.sticks(0);
            m2 += s.sticks(1);
        }
        CHECK(m1 / reps == doctest::Approx(4.0 / 7.0).epsilon(0.01));
        CHECK(m2 / reps == doctest::Approx(3.0 / 4.0).epsilon(0.01));
    }
}

TEST_CASE("slices") {
    DpmState s = initial_dpm_state(10000, 1);
    s.sticks = Vector::Constant(1, 0.8);
    s.weights = stick_breaking_weights(s.sticks);
    Rng rng(3);
    sample_slices(s, rng);
    CHECK(s.slices.minCoeff() > 0.0);
    CHECK(s.slices.maxCoeff() < 0.8);
    CHECK(s.slices.mean() == doctest::Approx(0.4).epsilon(0.025));
}

TEST_CASE("stick extension") {
    DpmHyper h = DpmHyper::defaults(1);
    Rng rng(4);
    SUBCASE("single stick suffices") {
        DpmState s = initial_dpm_state(3, 1);
        s.sticks = Vector::Constant(1, 0.9);
        s.weights = stick_breaking_weights(s.sticks);
        s.slices = Vector::Constant(3, 0.2);
        extend_sticks(s, h, rng);
        CHECK(s.components() == 1);
    }
    SUBCASE("extends until the cumulative mass passes 1 - u*") {
        DpmState s = two_component_state(Matrix::Identity(1, 1), Matrix::Identity(1, 1), 0.5, 0.6);
        s.slices = Eigen::Vector2d(0.1, 0.3);
        extend_sticks(s, h, rng);
        CHECK(s.components() >= 3);
        CHECK(s.weights.sum() > 0.9);
        CHECK(s.weights.head(static_cast<Index>(s.components()) - 1).sum() <= 0.9);
        CHECK(s.precisions.size() == s.components());
        CHECK(s.counts.size() == s.components());
    }
    SUBCASE("tiny concentration ends after one new stick") {
        int one = 0;
        for (int i = 0; i < 200; ++i) {
            DpmState s = initial_dpm_state(2, 1);
            s.concentration = 1e-4;
            s.slices = Eigen::Vector2d(0.01, 0.2);
            extend_sticks(s, h, rng);
            one += s.components() == 2;
        }
        CHECK(one >= 190);
    }
    SUBCASE("hard cap") {
        DpmHyper capped = h;
        capped.max_components = 3;
        DpmState s = initial_dpm_state(2, 1);
        s.concentration = 1e6;
        s.slices = Eigen::Vector2d(1e-12, 0.2);
        CHECK_THROWS_AS(extend_sticks(s, capped, rng), NumericError);
    }
}

TEST_CASE("precision updates") {
    SUBCASE("base measure mean is the identity") {
        const DpmHyper h = DpmHyper::with_df(2, 2.0);
        Rng rng(5);
        Matrix mean = Matrix::Zero(2, 2);
        const int m = 100000;
        for (int i = 0; i < m; ++i) mean += rng.wishart(h.wishart_dof(), h.base_scale);
        mean /= m;
        CHECK(std::abs(mean(0, 0) - 1.0) < 0.02);
        CHECK(std::abs(mean(1, 1) - 1.0) < 0.02);
        CHECK(std::abs(mean(0, 1)) < 0.02);
    }
    SUBCASE("posterior scale for one observation") {
        const DpmHyper h = DpmHyper::with_df(2, 2.0);  // V = I/3
        Matrix scatter = Matrix::Zero(2, 2);
        scatter(0, 0) = 1.0;
        const Matrix got = precision_posterior_scale(h, scatter);
        // (3I + e e')^{-1} = diag(1/4, 1/3)
        CHECK(std::abs(got(0, 0) - 0.25) < 1e-12);
        CHECK(std::abs(got(1, 1) - 1.0 / 3.0) < 1e-12);
        CHECK(std::abs(got(0, 1)) < 1e-12);
    }
    SUBCASE("empty components are drawn from the base and all stay PD") {
        DpmHyper h = DpmHyper::defaults(2);
        DpmState s = two_component_state(Matrix::Identity(2, 2), Matrix::Identity(2, 2), 0.5, 0.5);
        s.allocation = {0, 0, 0};
        s.refresh_counts();
        Rng rng(6);
        Matrix errors = Matrix::Random(3, 2);
        sample_precisions(s, h, errors, rng);
        for (const auto& p : s.precisions) CHECK(is_symmetric_pd(p));
    }
}

TEST_CASE("allocation probabilities") {
    Matrix l1(2, 2), l2(2, 2);
    l1 << 1.5, 0.3, 0.3, 0.8;
    l2 << 0.2, -0.05, -0.05, 0.4;
    const Vector e = Eigen::Vector2d(0.7, -1.9);
    SUBCASE("density ratio") {
        const DpmState s = two_component_state(l1, l2, 0.5, 0.5);
        const Vector p = allocation_probabilities(s, e, 0.01);
        const Matrix c1 = l1.inverse(), c2 = l2.inverse();
        const double f1 = oracle::normal_density2(e(0), e(1), c1(0, 0), c1(0, 1), c1(1, 1));
        const double f2 = oracle::normal_density2(e(0), e(1), c2(0, 0), c2(0, 1), c2(1, 1));
        CHECK(std::abs(p(0) - f1 / (f1 + f2)) < 1e-12);
        CHECK(std::abs(p(1) - f2 / (f1 + f2)) < 1e-12);
    }
    SUBCASE("equal precisions are equally likely") {
        const DpmState s = two_component_state(l1, l1, 0.5, 0.5);
        const Vector p = allocation_probabilities(s, e, 0.01);
        CHECK(p(0) == doctest::Approx(0.5));
    }
    SUBCASE("only the slice set is eligible") {
        const DpmState s = two_component_state(l1, l2, 0.5, 0.5);  // rho = (0.5, 0.25)
        const Vector p = allocation_probabilities(s, e, 0.3);
        CHECK(p(0) == 1.0);
        CHECK(p(1) == 0.0);
        CHECK_THROWS_AS(allocation_probabilities(s, e, 0.6), std::logic_error);
    }
    SUBCASE("extreme residuals do not underflow") {
        const DpmState s = two_component_state(l1, l2, 0.5, 0.5);
        const Vector p = allocation_probabilities(s, Eigen::Vector2d(80.0, -60.0), 0.01);
        CHECK(std::isfinite(p.sum()));
        CHECK(p.sum() == doctest::Approx(1.0));
    }
}

TEST_CASE("mixture density") {
    DpmState s;
    s.sticks = Vector::Constant(1, 1.0);
    s.weights = Vector::Constant(1, 1.0);
    s.precisions = {Matrix::Identity(2, 2)};
    CHECK(mixture_density(Vector::Zero(2), s).value == doctest::Approx(0.159155).epsilon(1e-6));

    DpmState t;
    t.weights = Eigen::Vector2d(0.5, 0.5);
    t.precisions = {Matrix::Identity(1, 1), Matrix::Constant(1, 1, 4.0)};
    const MixtureDensity d = mixture_density(Vector::Zero(1), t);
    CHECK(d.value == doctest::Approx(0.59841).epsilon(1e-5));
    CHECK(d.truncation_mass == doctest::Approx(0.0));

    SUBCASE("quadrature recovers the total weight") {
        const DpmState u = two_component_state(Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 0.5), 0.6, 0.5);
        const double h = 0.001;
        double mass = 0;
        Vector x(1);
        for (double v = -20; v <= 20; v += h) {
            x(0) = v;
            mass += mixture_density(x, u).value * h;
        }
        CHECK(std::abs(mass - u.weights.sum()) < 1e-4);
    }
}

TEST_CASE("integrating the slice joint density over u gives the mixture") {
    Matrix l1(2, 2), l2(2, 2);
    l1 << 1.2, 0.2, 0.2, 0.9;
    l2 << 0.3, 0.0, 0.0, 0.6;
    const DpmState s = two_component_state(l1, l2, 0.55, 0.7);
    for (const Vector& e : {Vector(Eigen::Vector2d(0.0, 0.0)), Vector(Eigen::Vector2d(1.3, -0.4)),
                            Vector(Eigen::Vector2d(-3.0, 2.5))}) {
        // The integrand is piecewise constant in u; breakpoints at the weights.
        std::vector<double> cuts{0.0, s.weights(0), s.weights(1), 1.0};
        std::sort(cuts.begin(), cuts.end());
        double integral = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const int steps = 2000;
            const double w = (cuts[i + 1] - cuts[i]) / steps;
            for (int k = 0; k < steps; ++k) integral += slice_joint_density(e, cuts[i] + (k + 0.5) * w, s) * w;
        }
        CHECK(std::abs(integral - mixture_density(e, s).value) < 1e-6);
    }
}

TEST_CASE("full sweep invariants") {
    const Index k = 2;
    const std::size_t n = 400;
    Rng data(8);
    Matrix errors(static_cast<Index>(n), k);
    for (Index t = 0; t < static_cast<Index>(n); ++t)
        errors.row(t) = (t % 5 == 0 ? 3.0 : 0.7) * data.normal_vector(k).transpose();
    DpmState s = initial_dpm_state(n, k);
    const DpmHyper h = DpmHyper::defaults(k);
    Rng rng(9);
    for (int it = 0; it < 200; ++it) {
        dpm_sweep(s, h, errors, rng);
        int total = 0;
        for (int c : s.counts) total += c;
        CHECK(total == static_cast<int>(n));
        for (std::size_t t = 0; t < n; ++t) CHECK(s.slices(static_cast<Index>(t)) < s.weights(s.allocation[t]));
        for (const auto& p : s.precisions) CHECK(is_symmetric_pd(p));
        CHECK(s.concentration > 0.0);
        CHECK(s.weights.minCoeff() > 0.0);
        CHECK(s.weights.sum() <= 1.0 + 1e-12);
    }
    const DpmSnapshot snap = snapshot(s);
    CHECK(snap.precisions.size() == s.components());
}
