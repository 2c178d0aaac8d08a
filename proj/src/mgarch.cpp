#include "dpmgarch/mgarch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dpmgarch/optimize.hpp"

namespace dpmgarch {

std::string to_string(Variant v) { return v == Variant::scalar ? "scalar" : "vector"; }

Variant parse_variant(const std::string& s) {
    if (s == "scalar") return Variant::scalar;
    if (s == "vector") return Variant::vector;
    throw std::invalid_argument("unknown variant '" + s + "' (expected scalar|vector)");
}

Vector GarchParams::flatten() const {
    Vector flat(size());
    const Index k = assets();
    const Index c = correlation_size();
    flat << mu, omega, alpha, beta, phi, kappa, lambda, delta;
    (void)k;
    (void)c;
    return flat;
}

GarchParams GarchParams::unflatten(Variant variant, Index k, const Vector& flat) {
    GarchParams p;
    p.variant = variant;
    const Index c = variant == Variant::scalar ? 1 : k;
    if (flat.size() != 5 * k + 3 * c) throw std::invalid_argument("flattened parameter vector has the wrong length");
    p.mu = flat.segment(0, k);
    p.omega = flat.segment(k, k);
    p.alpha = flat.segment(2 * k, k);
    p.beta = flat.segment(3 * k, k);
    p.phi = flat.segment(4 * k, k);
    p.kappa = flat.segment(5 * k, c);
    p.lambda = flat.segment(5 * k + c, c);
    p.delta = flat.segment(5 * k + 2 * c, c);
    return p;
}

std::vector<std::string> GarchParams::names(Variant variant, Index k) {
    std::vector<std::string> out;
    for (const char* base : {"mu", "omega", "alpha", "beta", "phi"})
        for (Index i = 0; i < k; ++i) out.push_back(std::string(base) + "_" + std::to_string(i + 1));
    for (const char* base : {"kappa", "lambda", "delta"}) {
        if (variant == Variant::scalar) {
            out.emplace_back(base);
        } else {
            for (Index i = 0; i < k; ++i) out.push_back(std::string(base) + "_" + std::to_string(i + 1));
        }
    }
    return out;
}

std::vector<std::string> GarchParams::names() const { return names(variant, assets()); }

GarchParams GarchParams::uniform(Variant variant, Index k, double mu, double omega, double alpha, double beta,
                                 double phi, double kappa, double lambda, double delta) {
    GarchParams p;
    p.variant = variant;
    const Index c = variant == Variant::scalar ? 1 : k;
    p.mu = Vector::Constant(k, mu);
    p.omega = Vector::Constant(k, omega);
    p.alpha = Vector::Constant(k, alpha);
    p.beta = Vector::Constant(k, beta);
    p.phi = Vector::Constant(k, phi);
    p.kappa = Vector::Constant(c, kappa);
    p.lambda = Vector::Constant(c, lambda);
    p.delta = Vector::Constant(c, delta);
    return p;
}

GarchParams GarchParams::sampler_default(Variant variant, const Vector& mean) {
    GarchParams p = uniform(variant, mean.size(), 0.0, 0.05, 0.05, 0.85, 0.05, 0.05, 0.90, 0.02);
    if (variant == Variant::vector) {
        // Same dynamics as the scalar default: kappa_i^2 = 0.05, lambda_i^2 = 0.90, delta_i^2 = 0.02.
        p.kappa.setConstant(std::sqrt(0.05));
        p.lambda.setConstant(std::sqrt(0.90));
        p.delta.setConstant(std::sqrt(0.02));
    }
    p.mu = mean;
    return p;
}

GarchParams GarchParams::simulation_default(Variant variant, Index k) {
    GarchParams p = uniform(variant, k, 0.0, 0.05, 0.05, 0.85, 0.10, 0.05, 0.90, 0.03);
    if (variant == Variant::vector) {
        p.kappa.setConstant(std::sqrt(0.05));
        p.lambda.setConstant(std::sqrt(0.90));
        p.delta.setConstant(std::sqrt(0.03));
    }
    return p;
}

std::string Violation::describe() const {
    std::ostringstream os;
    os << constraint;
    if (asset >= 0) os << " asset " << (asset + 1);
    os << " (value " << value << ")";
    return os.str();
}

std::string describe(const std::vector<Violation>& v) {
    std::string out;
    for (const auto& x : v) {
        if (!out.empty()) out += "; ";
        out += x.describe();
    }
    return out;
}

std::vector<Violation> validate_params(const GarchParams& p, bool allow_boundary) {
    std::vector<Violation> out;
    const Index k = p.assets();
    const Index c = p.correlation_size();
    if (p.omega.size() != k || p.alpha.size() != k || p.beta.size() != k || p.phi.size() != k ||
        p.kappa.size() != c || p.lambda.size() != c || p.delta.size() != c) {
        out.push_back({"dimension", -1, 0.0});
        return out;
    }
    auto in_unit = [&](double v) { return allow_boundary ? (v >= 0.0 && v < 1.0) : (v > 0.0 && v < 1.0); };
    auto positive = [&](double v) { return allow_boundary ? v >= 0.0 : v > 0.0; };

    for (Index i = 0; i < k; ++i) {
        if (!std::isfinite(p.mu(i))) out.push_back({"mu_finite", i, p.mu(i)});
        if (!(p.omega(i) > kOmegaFloor)) out.push_back({"omega_positive", i, p.omega(i)});
        if (!in_unit(p.alpha(i))) out.push_back({"alpha_range", i, p.alpha(i)});
        if (!in_unit(p.beta(i))) out.push_back({"beta_range", i, p.beta(i)});
        if (!in_unit(p.phi(i))) out.push_back({"phi_range", i, p.phi(i)});
        const double persistence = p.alpha(i) + p.beta(i) + 0.5 * p.phi(i);
        if (!(persistence < 1.0)) out.push_back({"stationarity", i, persistence});
    }
    if (p.variant == Variant::scalar) {
        if (!positive(p.kappa(0))) out.push_back({"kappa_positive", -1, p.kappa(0)});
        if (!positive(p.lambda(0))) out.push_back({"lambda_positive", -1, p.lambda(0)});
        if (!positive(p.delta(0))) out.push_back({"delta_positive", -1, p.delta(0)});
        const double persistence = p.kappa(0) + p.lambda(0) + 0.5 * p.delta(0);
        if (!(persistence < 1.0)) out.push_back({"correlation_stationarity", -1, persistence});
    } else {
        for (Index i = 0; i < k; ++i) {
            if (!positive(p.kappa(i))) out.push_back({"kappa_positive", i, p.kappa(i)});
            if (!positive(p.lambda(i))) out.push_back({"lambda_positive", i, p.lambda(i)});
            if (!positive(p.delta(i))) out.push_back({"delta_positive", i, p.delta(i)});
            const double persistence =
                p.kappa(i) * p.kappa(i) + p.lambda(i) * p.lambda(i) + 0.5 * p.delta(i) * p.delta(i);
            if (!(persistence < 1.0)) out.push_back({"correlation_stationarity", i, persistence});
        }
    }
    return out;
}

CorrelationCoefficients correlation_coefficients(const GarchParams& p) {
    const Index k = p.assets();
    CorrelationCoefficients cc;
    if (p.variant == Variant::scalar) {
        const Matrix ones = Matrix::Ones(k, k);
        cc.intercept = 1.0 - p.kappa(0) - p.lambda(0) - 0.5 * p.delta(0);
        cc.shock = p.kappa(0) * ones;
        cc.persistence = p.lambda(0) * ones;
        cc.asymmetry = p.delta(0) * ones;
    } else {
        const double kb = p.kappa.mean();
        const double lb = p.lambda.mean();
        const double db = p.delta.mean();
        cc.intercept = 1.0 - kb * kb - lb * lb - 0.5 * db * db;
        cc.shock = p.kappa * p.kappa.transpose();
        cc.persistence = p.lambda * p.lambda.transpose();
        cc.asymmetry = p.delta * p.delta.transpose();
    }
    return cc;
}

namespace {

Vector gjr_variance(const GarchParams& p, const Vector& prev_residual, const Vector& prev_variance) {
    const Vector indicator = (prev_residual.array() < 0.0).cast<double>().matrix();
    return (p.omega.array() + (p.alpha.array() + p.phi.array() * indicator.array()) * prev_residual.array().square() +
            p.beta.array() * prev_variance.array())
        .matrix();
}

Matrix correlation_q(const CorrelationCoefficients& cc, const Matrix& target, const Vector& prev_std,
                     const Vector& prev_neg, const Matrix& prev_q) {
    Matrix q = cc.intercept * target + cc.shock.cwiseProduct(prev_std * prev_std.transpose()) +
               cc.persistence.cwiseProduct(prev_q) + cc.asymmetry.cwiseProduct(prev_neg * prev_neg.transpose());
    symmetrize(q);
    return q;
}

Matrix normalize_q(const Matrix& q) {
    const Vector scale = q.diagonal().array().rsqrt().matrix();
    Matrix r = scale.asDiagonal() * q * scale.asDiagonal();
    r.diagonal().setOnes();
    symmetrize(r);
    return r;
}

Matrix compose_h(const Vector& variance, const Matrix& r) {
    const Vector sd = variance.array().sqrt().matrix();
    Matrix h = sd.asDiagonal() * r * sd.asDiagonal();
    symmetrize(h);
    return h;
}

Vector negative_part(const Vector& x) { return x.cwiseMin(0.0); }

Matrix sample_correlation(const Matrix& x) {
    const Matrix centered = x.rowwise() - x.colwise().mean();
    Matrix cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
    const Vector scale = cov.diagonal().array().rsqrt().matrix();
    Matrix s = scale.asDiagonal() * cov * scale.asDiagonal();
    s.diagonal().setOnes();
    symmetrize(s);
    return s;
}

void require_admissible(const GarchParams& p) {
    const auto v = validate_params(p, /*allow_boundary=*/true);
    if (!v.empty()) throw std::invalid_argument("inadmissible GARCH parameters: " + describe(v));
}

}  // namespace

NextStep step_forward(const GarchParams& p, const CorrelationCoefficients& cc, const Matrix& target,
                      const StepState& prev) {
    NextStep next;
    next.variance = gjr_variance(p, prev.residual, prev.variance);
    next.q = correlation_q(cc, target, prev.standardized, prev.negative, prev.q);
    if ((next.q.diagonal().array() <= 0.0).any() || !guarded_cholesky(next.q))
        throw NumericError("Q is not positive definite");
    next.r = normalize_q(next.q);
    next.h = compose_h(next.variance, next.r);
    return next;
}

VolatilityPath filter_volatilities(const GarchParams& p, const Matrix& returns, const FilterOptions& opts) {
    require_admissible(p);
    const Index n = returns.rows();
    const Index k = returns.cols();
    if (k != p.assets()) throw std::invalid_argument("return columns do not match the parameter dimension");
    if (n < 2) throw std::invalid_argument("filtering needs at least two observations");

    VolatilityPath path;
    path.residuals = returns.rowwise() - p.mu.transpose();

    if (opts.initial_variance) {
        path.initial_variance = *opts.initial_variance;
    } else {
        const Matrix centered = path.residuals.rowwise() - path.residuals.colwise().mean();
        path.initial_variance = (centered.array().square().colwise().sum() / static_cast<double>(n - 1)).transpose();
    }

    // Univariate GJR pass; the standardized residuals fix S before Q is run.
    path.variances.resize(n, k);
    path.standardized.resize(n, k);
    path.negative.resize(n, k);
    Vector prev_residual = Vector::Zero(k);
    Vector prev_variance = path.initial_variance;
    for (Index t = 0; t < n; ++t) {
        const Vector d2 = gjr_variance(p, prev_residual, prev_variance);
        if (!(d2.array() > 0.0).all()) throw NumericError("non-positive variance at t=" + std::to_string(t));
        const Vector a = path.residuals.row(t).transpose();
        const Vector e = a.array() / d2.array().sqrt();
        path.variances.row(t) = d2.transpose();
        path.standardized.row(t) = e.transpose();
        path.negative.row(t) = negative_part(e).transpose();
        prev_residual = a;
        prev_variance = d2;
    }

    path.target = opts.target ? *opts.target : sample_correlation(path.standardized);
    path.initial_q = opts.initial_q ? *opts.initial_q : path.target;
    const CorrelationCoefficients cc = correlation_coefficients(p);

    path.q.resize(static_cast<std::size_t>(n));
    path.r.resize(static_cast<std::size_t>(n));
    path.h.resize(static_cast<std::size_t>(n));
    path.h_sqrt.resize(static_cast<std::size_t>(n));
    path.model_errors.resize(n, k);
    path.log_det_h.resize(n);

    Vector prev_std = Vector::Zero(k);
    Vector prev_neg = Vector::Zero(k);
    Matrix prev_q = path.initial_q;
    for (Index t = 0; t < n; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        Matrix q = correlation_q(cc, path.target, prev_std, prev_neg, prev_q);
        if ((q.diagonal().array() <= 0.0).any() || !guarded_cholesky(q))
            throw NumericError("Q_t is not positive definite at t=" + std::to_string(t));
        Matrix r = normalize_q(q);
        Matrix h = compose_h(path.variances.row(t).transpose(), r);
        auto llt = guarded_cholesky(h);
        if (!llt) throw NumericError("H_t is not positive definite at t=" + std::to_string(t));
        Matrix l = llt->matrixL();
        path.model_errors.row(t) =
            l.triangularView<Eigen::Lower>().solve(path.residuals.row(t).transpose()).transpose();
        path.log_det_h(t) = 2.0 * l.diagonal().array().log().sum();
        prev_std = path.standardized.row(t).transpose();
        prev_neg = path.negative.row(t).transpose();
        prev_q = q;
        path.q[ut] = std::move(q);
        path.r[ut] = std::move(r);
        path.h[ut] = std::move(h);
        path.h_sqrt[ut] = std::move(l);
    }
    return path;
}

NextStep next_step(const GarchParams& p, const VolatilityPath& path) {
    const Index last = path.rows() - 1;
    StepState prev;
    prev.residual = path.residuals.row(last).transpose();
    prev.variance = path.variances.row(last).transpose();
    prev.standardized = path.standardized.row(last).transpose();
    prev.negative = path.negative.row(last).transpose();
    prev.q = path.q.back();
    return step_forward(p, correlation_coefficients(p), path.target, prev);
}

Matrix adjusted_covariance(const Matrix& h, const Matrix& precision) {
    const Matrix l = lower_sqrt(h, "H");
    auto llt = guarded_cholesky(precision);
    if (!llt) throw NumericError("precision matrix is not positive definite");
    // L Lambda^{-1} L' = (Lambda^{-1/2} L')' (Lambda^{-1/2} L') with Lambda = C C'.
    const Matrix half = llt->matrixL().solve(l.transpose());
    Matrix out = half.transpose() * half;
    symmetrize(out);
    return out;
}

double log_likelihood(const VolatilityPath& path, std::span<const int> allocation, std::span<const Matrix> precisions) {
    const Index n = path.rows();
    const Index k = path.assets();
    if (static_cast<Index>(allocation.size()) != n) throw std::invalid_argument("allocation length differs from T");
    std::vector<double> log_det(precisions.size());
    for (std::size_t j = 0; j < precisions.size(); ++j) log_det[j] = log_determinant_pd(precisions[j]);
    double ll = 0.0;
    for (Index t = 0; t < n; ++t) {
        const auto j = static_cast<std::size_t>(allocation[static_cast<std::size_t>(t)]);
        if (j >= precisions.size()) throw std::invalid_argument("allocation refers to a missing component");
        const auto e = path.model_errors.row(t);
        const double quad = e * precisions[j] * e.transpose();
        ll += static_cast<double>(k) * kLog2Pi + path.log_det_h(t) - log_det[j] + quad;
    }
    return -0.5 * ll;
}

double log_likelihood(const GarchParams& p, const Matrix& returns, std::span<const int> allocation,
                      std::span<const Matrix> precisions, const FilterOptions& opts) {
    return log_likelihood(filter_volatilities(p, returns, opts), allocation, precisions);
}

double gaussian_log_likelihood(const VolatilityPath& path) {
    const double k = static_cast<double>(path.assets());
    return -0.5 * (static_cast<double>(path.rows()) * k * kLog2Pi + path.log_det_h.sum() +
                   path.model_errors.array().square().sum());
}

UnconditionalMoments unconditional_covariance(const Matrix& returns) {
    const Index n = returns.rows();
    const Index k = returns.cols();
    if (n < k + 1) throw std::invalid_argument("unconditional covariance needs T >= K+1");
    UnconditionalMoments m;
    m.mean = returns.colwise().mean().transpose();
    const Matrix centered = returns.rowwise() - m.mean.transpose();
    m.covariance = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.covariance, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    m.singular = !(es.eigenvalues().minCoeff() > 1e-10 * std::max(top, 1e-300));
    return m;
}

// ---------------------------------------------------------------------------
// Gaussian maximum likelihood

namespace {

// Unconstrained coordinates: omega = exp(x); (alpha, beta, phi/2, slack) and
// (kappa, lambda, delta/2, slack) (squares for the vector variant) are softmax
// images of three free coordinates with the slack pinned at 0.
struct MlTransform {
    Variant variant;
    Index k;

    Index size() const { return 5 * k + 3 * (variant == Variant::scalar ? 1 : k); }

    static void softmax3(double x1, double x2, double x3, double& s1, double& s2, double& s3) {
        const double m = std::max({x1, x2, x3, 0.0});
        const double e1 = std::exp(x1 - m), e2 = std::exp(x2 - m), e3 = std::exp(x3 - m), e0 = std::exp(-m);
        const double z = e0 + e1 + e2 + e3;
        s1 = e1 / z;
        s2 = e2 / z;
        s3 = e3 / z;
    }

    GarchParams to_params(const Vector& x) const {
        const Index c = variant == Variant::scalar ? 1 : k;
        GarchParams p = GarchParams::uniform(variant, k, 0, 0, 0, 0, 0, 0, 0, 0);
        Index pos = 0;
        for (Index i = 0; i < k; ++i) p.mu(i) = x(pos++);
        for (Index i = 0; i < k; ++i) p.omega(i) = std::exp(x(pos++));
        for (Index i = 0; i < k; ++i) {
            double a, b, h;
            softmax3(x(pos), x(pos + 1), x(pos + 2), a, b, h);
            pos += 3;
            p.alpha(i) = a;
            p.beta(i) = b;
            p.phi(i) = 2.0 * h;
        }
        for (Index i = 0; i < c; ++i) {
            double a, b, h;
            softmax3(x(pos), x(pos + 1), x(pos + 2), a, b, h);
            pos += 3;
            if (variant == Variant::scalar) {
                p.kappa(i) = a;
                p.lambda(i) = b;
                p.delta(i) = 2.0 * h;
            } else {
                p.kappa(i) = std::sqrt(a);
                p.lambda(i) = std::sqrt(b);
                p.delta(i) = std::sqrt(2.0 * h);
            }
        }
        return p;
    }

    Vector from_params(const GarchParams& p) const {
        const Index c = variant == Variant::scalar ? 1 : k;
        Vector x(size());
        Index pos = 0;
        for (Index i = 0; i < k; ++i) x(pos++) = p.mu(i);
        for (Index i = 0; i < k; ++i) x(pos++) = std::log(p.omega(i));
        auto put = [&](double a, double b, double h) {
            const double slack = 1.0 - a - b - h;
            x(pos++) = std::log(a / slack);
            x(pos++) = std::log(b / slack);
            x(pos++) = std::log(h / slack);
        };
        for (Index i = 0; i < k; ++i) put(p.alpha(i), p.beta(i), 0.5 * p.phi(i));
        for (Index i = 0; i < c; ++i) {
            if (variant == Variant::scalar)
                put(p.kappa(i), p.lambda(i), 0.5 * p.delta(i));
            else
                put(p.kappa(i) * p.kappa(i), p.lambda(i) * p.lambda(i), 0.5 * p.delta(i) * p.delta(i));
        }
        return x;
    }
};

}  // namespace

MlFit fit_ml_gaussian(const Matrix& returns, Variant variant, const std::optional<GarchParams>& start,
                      const MlOptions& opts) {
    const Index k = returns.cols();
    GarchParams init = start ? *start : GarchParams::sampler_default(variant, returns.colwise().mean().transpose());
    if (init.variant != variant) throw std::invalid_argument("start parameters use a different variant");
    if (const auto v = validate_params(init); !v.empty())
        throw std::invalid_argument("ML start violates constraints: " + describe(v));

    const MlTransform transform{variant, k};
    auto objective = [&](const Vector& x) {
        const GarchParams p = transform.to_params(x);
        if (!validate_params(p).empty()) return std::numeric_limits<double>::infinity();
        try {
            return -gaussian_log_likelihood(filter_volatilities(p, returns));
        } catch (const NumericError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    Vector x = transform.from_params(init);
    double value = objective(x);
    MlFit fit;
    NelderMeadOptions nm;
    nm.tolerance = opts.tolerance;
    nm.initial_step = 0.5;
    for (int round = 0; round <= opts.restarts && fit.evaluations < opts.max_evaluations; ++round) {
        nm.max_evaluations = opts.max_evaluations - fit.evaluations;
        const NelderMeadResult r = nelder_mead(objective, x, nm);
        fit.evaluations += r.evaluations;
        const double gain = value - r.value;
        if (r.value <= value) {
            x = r.x;
            value = r.value;
        }
        fit.converged = r.converged;
        if (r.converged && gain <= opts.tolerance * (1.0 + std::abs(value))) break;
        nm.initial_step = 0.1;
    }
    fit.params = transform.to_params(x);
    if (!validate_params(fit.params).empty() || !std::isfinite(value)) {
        fit.params = init;
        value = objective(transform.from_params(init));
    }
    fit.log_likelihood = -value;
    fit.status = fit.converged ? "converged" : "evaluation budget exhausted";
    return fit;
}

}  // namespace dpmgarch
