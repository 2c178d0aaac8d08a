#include "dpmgarch/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "dpmgarch/errors.hpp"

namespace dpmgarch {

std::string to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::gaussian: return "gaussian";
        case ErrorKind::student_t: return "student_t";
        case ErrorKind::mixture: return "mixture";
    }
    return "unknown";
}

ErrorSpec ErrorSpec::gaussian(Index k) {
    ErrorSpec s;
    s.kind = ErrorKind::gaussian;
    s.dimension = k;
    return s;
}

ErrorSpec ErrorSpec::student_t(Index k, double nu, bool standardized) {
    ErrorSpec s;
    s.kind = ErrorKind::student_t;
    s.dimension = k;
    s.nu = nu;
    s.standardized = standardized;
    return s;
}

ErrorSpec ErrorSpec::two_component_mixture() {
    ErrorSpec s;
    s.kind = ErrorKind::mixture;
    s.dimension = 2;
    s.weights = Vector(2);
    s.weights << 0.9, 0.1;
    Matrix c1(2, 2), c2(2, 2);
    c1 << 0.8, 0.0849, 0.0849, 0.9;
    c2 << 2.8, -0.7637, -0.7637, 1.9;
    s.covariances = {c1, c2};
    return s;
}

ErrorSpec ErrorSpec::preset(const std::string& name) {
    if (name == "gaussian") return gaussian();
    if (name == "student_t") return student_t();
    if (name == "mixture") return two_component_mixture();
    throw std::invalid_argument("unknown error preset '" + name + "' (gaussian, student_t, mixture)");
}

void ErrorSpec::validate() const {
    if (dimension < 1) throw std::invalid_argument("error dimension must be positive");
    if (kind == ErrorKind::student_t && !(nu > 2.0))
        throw std::invalid_argument("student-t degrees of freedom must exceed 2");
    if (kind == ErrorKind::mixture) {
        if (weights.size() == 0 || static_cast<std::size_t>(weights.size()) != covariances.size())
            throw std::invalid_argument("mixture needs one covariance per weight");
        if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-10)
            throw std::invalid_argument("mixture weights must be non-negative and sum to 1");
        for (const Matrix& c : covariances)
            if (c.rows() != dimension || c.cols() != dimension || !is_symmetric_pd(c))
                throw std::invalid_argument("mixture component covariance must be K x K positive definite");
    }
}

Vector ErrorSpec::draw(Rng& rng) const {
    switch (kind) {
        case ErrorKind::gaussian: return rng.normal_vector(dimension);
        case ErrorKind::student_t: {
            const double w = std::sqrt(nu / rng.chi_squared(nu));
            const double scale = standardized ? std::sqrt((nu - 2.0) / nu) : 1.0;
            return (w * scale) * rng.normal_vector(dimension);
        }
        case ErrorKind::mixture: {
            const double u = rng.uniform();
            std::size_t j = 0;
            double cumulative = weights(0);
            while (u >= cumulative && j + 1 < covariances.size()) cumulative += weights(static_cast<Index>(++j));
            return lower_sqrt(covariances[j], "mixture covariance") * rng.normal_vector(dimension);
        }
    }
    throw std::logic_error("unhandled error kind");
}

Moments mixture_moments(const ErrorSpec& spec) {
    spec.validate();
    Moments m{Vector::Zero(spec.dimension), Matrix::Identity(spec.dimension, spec.dimension)};
    if (spec.kind == ErrorKind::student_t && !spec.standardized) m.covariance *= spec.nu / (spec.nu - 2.0);
    if (spec.kind == ErrorKind::mixture) {
        m.covariance.setZero();
        for (std::size_t j = 0; j < spec.covariances.size(); ++j)
            m.covariance += spec.weights(static_cast<Index>(j)) * spec.covariances[j];
    }
    return m;
}

Vector unconditional_variance(const GarchParams& p) {
    return (p.omega.array() / (1.0 - p.alpha.array() - p.beta.array() - 0.5 * p.phi.array())).matrix();
}

SimulatedSeries generate_series(const GarchParams& p, Index observations, const ErrorSpec& spec,
                                std::uint64_t seed) {
    const auto violations = validate_params(p, /*allow_boundary=*/true);
    if (!violations.empty()) throw std::invalid_argument("invalid generating parameters: " + describe(violations));
    if (observations < 1) throw std::invalid_argument("number of observations must be at least 1");
    spec.validate();
    const Index k = p.assets();
    if (spec.dimension != k) throw std::invalid_argument("error dimension does not match the parameters");

    SimulatedSeries out;
    out.filter_options.target = Matrix::Identity(k, k);
    out.filter_options.initial_variance = unconditional_variance(p);
    out.filter_options.initial_q = Matrix::Identity(k, k);

    VolatilityPath& path = out.truth;
    const Index n = observations;
    const auto un = static_cast<std::size_t>(n);
    path.target = *out.filter_options.target;
    path.initial_variance = *out.filter_options.initial_variance;
    path.initial_q = *out.filter_options.initial_q;
    path.residuals.resize(n, k);
    path.variances.resize(n, k);
    path.standardized.resize(n, k);
    path.negative.resize(n, k);
    path.model_errors.resize(n, k);
    path.log_det_h.resize(n);
    path.q.resize(un);
    path.r.resize(un);
    path.h.resize(un);
    path.h_sqrt.resize(un);

    const CorrelationCoefficients cc = correlation_coefficients(p);
    Rng rng = Rng::derive(seed, "simulate");
    StepState prev{Vector::Zero(k), path.initial_variance, Vector::Zero(k), Vector::Zero(k), path.initial_q};
    Matrix returns(n, k);
    for (Index t = 0; t < n; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        NextStep step = step_forward(p, cc, path.target, prev);
        auto llt = guarded_cholesky(step.h);
        if (!llt) throw NumericError("simulated H_t is not positive definite at t=" + std::to_string(t));
        Matrix l = llt->matrixL();
        const Vector e = spec.draw(rng);
        const Vector a = l * e;
        returns.row(t) = (p.mu + a).transpose();

        prev.residual = a;
        prev.variance = step.variance;
        prev.standardized = (a.array() / step.variance.array().sqrt()).matrix();
        prev.negative = prev.standardized.cwiseMin(0.0);
        prev.q = step.q;

        path.residuals.row(t) = a.transpose();
        path.variances.row(t) = step.variance.transpose();
        path.standardized.row(t) = prev.standardized.transpose();
        path.negative.row(t) = prev.negative.transpose();
        path.model_errors.row(t) = e.transpose();
        path.log_det_h(t) = 2.0 * l.diagonal().array().log().sum();
        path.q[ut] = std::move(step.q);
        path.r[ut] = std::move(step.r);
        path.h[ut] = std::move(step.h);
        path.h_sqrt[ut] = std::move(l);
    }

    out.series.returns = std::move(returns);
    const Date start = std::chrono::sys_days{std::chrono::year{2000} / 1 / 1};
    for (Index t = 0; t < n; ++t) out.series.timestamps.push_back(start + std::chrono::days{t});
    for (Index i = 0; i < k; ++i) out.series.labels.push_back("asset_" + std::to_string(i + 1));
    return out;
}

}  // namespace dpmgarch
