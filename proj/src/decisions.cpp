#include "dpmgarch/decisions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dpmgarch/errors.hpp"

namespace dpmgarch {

std::string to_string(Rule r) { return r == Rule::utility ? "utility" : "gmv"; }

Rule parse_rule(const std::string& s) {
    if (s == "utility") return Rule::utility;
    if (s == "gmv") return Rule::gmv;
    throw std::invalid_argument("unknown rule '" + s + "' (expected utility or gmv)");
}

DecisionConfig DecisionConfig::hedging() {
    DecisionConfig c;
    c.gamma = 0.3;
    return c;
}

void DecisionConfig::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (!(multiplier > 0.0)) throw std::invalid_argument("contract multiplier must be positive");
}

namespace {

// Quadratic form 1/2 p'Ap - b'p of the rule.
struct Quadratic {
    Matrix a;
    Vector b;
};

Quadratic rule_quadratic(const Vector& mu, const Matrix& sigma, const DecisionConfig& cfg) {
    if (cfg.rule == Rule::utility) return {cfg.gamma * sigma, mu};
    return {sigma, Vector::Zero(sigma.rows())};
}

void check_inputs(const Vector& mu, const Matrix& sigma, const DecisionConfig& cfg) {
    cfg.validate();
    if (sigma.rows() != sigma.cols() || sigma.rows() == 0) throw std::invalid_argument("covariance must be square");
    if (cfg.rule == Rule::utility && mu.size() != sigma.rows())
        throw std::invalid_argument("mean and covariance dimensions differ");
    if (!is_symmetric_pd(sigma)) throw NumericError("covariance matrix is not positive definite");
}

// Minimiser of the quadratic on {sum p = 1} restricted to `free` coordinates.
Vector budget_solve(const Quadratic& q, const std::vector<Index>& free) {
    const auto n = static_cast<Index>(free.size());
    Matrix a(n, n);
    Vector b(n);
    for (Index i = 0; i < n; ++i) {
        b(i) = q.b(free[static_cast<std::size_t>(i)]);
        for (Index j = 0; j < n; ++j) a(i, j) = q.a(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
    }
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) throw NumericError("sub-covariance is not positive definite");
    const Vector ainv_one = llt.solve(Vector::Ones(n));
    const Vector ainv_b = llt.solve(b);
    const double theta = (ainv_b.sum() - 1.0) / ainv_one.sum();
    return ainv_b - theta * ainv_one;
}

double kkt_residual(const Quadratic& q, const Vector& p) {
    const Vector g = q.a * p - q.b;
    // theta from the free coordinates; with none free use the smallest gradient.
    double theta = 0.0;
    int nfree = 0;
    for (Index i = 0; i < p.size(); ++i) {
        if (p(i) > 1e-12) {
            theta -= g(i);
            ++nfree;
        }
    }
    theta = nfree > 0 ? theta / nfree : -g.minCoeff();
    double r = std::abs(p.sum() - 1.0);
    for (Index i = 0; i < p.size(); ++i) {
        r = std::max(r, std::max(0.0, -p(i)));
        const double nu = g(i) + theta;
        r = std::max(r, p(i) > 1e-12 ? std::abs(nu) : std::max(0.0, -nu));
    }
    return r;
}

ConstrainedSolution clamp_two(const Quadratic& q) {
    const double curvature = q.a(0, 0) - 2.0 * q.a(0, 1) + q.a(1, 1);
    const double t = (q.a(1, 1) - q.a(0, 1) + q.b(0) - q.b(1)) / curvature;
    ConstrainedSolution s;
    s.weights = Vector(2);
    s.weights(0) = std::clamp(t, 0.0, 1.0);
    s.weights(1) = 1.0 - s.weights(0);
    s.converged = true;
    s.method = "clamp";
    return s;
}

ConstrainedSolution active_set(const Quadratic& q) {
    const Index k = q.b.size();
    ConstrainedSolution s;
    s.method = "active-set";
    Vector p = Vector::Constant(k, 1.0 / static_cast<double>(k));
    std::vector<bool> at_zero(static_cast<std::size_t>(k), false);
    const int max_iter = 50 * static_cast<int>(k) + 50;
    for (int it = 0; it < max_iter; ++it) {
        s.iterations = it + 1;
        std::vector<Index> free;
        for (Index i = 0; i < k; ++i)
            if (!at_zero[static_cast<std::size_t>(i)]) free.push_back(i);
        const Vector xf = budget_solve(q, free);
        Vector x = Vector::Zero(k);
        for (std::size_t i = 0; i < free.size(); ++i) x(free[i]) = xf(static_cast<Index>(i));

        if (x.minCoeff() >= -1e-14) {
            p = x.cwiseMax(0.0);
            const Vector g = q.a * p - q.b;
            double theta = 0.0;
            for (Index i : free) theta -= g(i);
            theta /= static_cast<double>(free.size());
            Index release = -1;
            double worst = -1e-12;
            for (Index i = 0; i < k; ++i) {
                if (!at_zero[static_cast<std::size_t>(i)]) continue;
                const double nu = g(i) + theta;
                if (nu < worst) {
                    worst = nu;
                    release = i;
                }
            }
            if (release < 0) {
                s.converged = true;
                break;
            }
            at_zero[static_cast<std::size_t>(release)] = false;
            continue;
        }
        // Step toward x until the first free coordinate hits zero.
        double step = 1.0;
        Index block = -1;
        for (Index i : free) {
            if (x(i) < 0.0) {
                const double ratio = p(i) / (p(i) - x(i));
                if (ratio < step) {
                    step = ratio;
                    block = i;
                }
            }
        }
        p += step * (x - p);
        if (block >= 0) {
            p(block) = 0.0;
            at_zero[static_cast<std::size_t>(block)] = true;
        }
    }
    p = p.cwiseMax(0.0);
    p /= p.sum();
    s.weights = p;
    return s;
}

ConstrainedSolution projected_gradient(const Quadratic& q) {
    ConstrainedSolution s;
    s.method = "projected-gradient";
    const Index k = q.b.size();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(q.a, Eigen::EigenvaluesOnly);
    const double step = 1.0 / eig.eigenvalues().maxCoeff();
    Vector p = Vector::Constant(k, 1.0 / static_cast<double>(k));
    for (int it = 0; it < 200000; ++it) {
        const Vector next = project_simplex(p - step * (q.a * p - q.b));
        s.iterations = it + 1;
        const double change = (next - p).lpNorm<Eigen::Infinity>();
        p = next;
        if (change < 1e-15) {
            s.converged = true;
            break;
        }
    }
    s.weights = p;
    return s;
}

}  // namespace

Vector static_weights(const Vector& mu, const Matrix& sigma, const DecisionConfig& cfg) {
    check_inputs(mu, sigma, cfg);
    const Index k = sigma.rows();
    Eigen::LLT<Matrix> llt(sigma);
    const Vector sinv_one = llt.solve(Vector::Ones(k));
    if (cfg.rule == Rule::gmv) return sinv_one / sinv_one.sum();
    const Vector sinv_mu = llt.solve(mu);
    return (sinv_mu - ((sinv_mu.sum() - cfg.gamma) / sinv_one.sum()) * sinv_one) / cfg.gamma;
}

double portfolio_objective(const Vector& p, const Vector& mu, const Matrix& sigma, const DecisionConfig& cfg) {
    const double quad = 0.5 * p.dot(sigma * p);
    if (cfg.rule == Rule::gmv) return quad;
    return cfg.gamma * quad - p.dot(mu);
}

Vector project_simplex(const Vector& v) {
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double tau = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cumulative += u[i];
        const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) tau = t;
    }
    return (v.array() - tau).cwiseMax(0.0).matrix();
}

ConstrainedSolution constrained_weights(const Vector& mu, const Matrix& sigma, const DecisionConfig& cfg) {
    const Vector unconstrained = static_weights(mu, sigma, cfg);
    const Quadratic q = rule_quadratic(cfg.rule == Rule::utility ? mu : Vector::Zero(sigma.rows()), sigma, cfg);
    ConstrainedSolution s;
    if (unconstrained.minCoeff() >= 0.0) {
        s.weights = unconstrained;
        s.converged = true;
        s.method = "closed-form";
    } else if (sigma.rows() == 2) {
        s = clamp_two(q);
    } else {
        s = active_set(q);
        s.kkt_residual = kkt_residual(q, s.weights);
        if (!s.converged || s.kkt_residual > 1e-8) s = projected_gradient(q);
    }
    s.kkt_residual = kkt_residual(q, s.weights);
    return s;
}

Vector optimal_weights(const Vector& mu, const Matrix& sigma, const DecisionConfig& cfg) {
    if (cfg.short_sale_allowed) return static_weights(mu, sigma, cfg);
    ConstrainedSolution s = constrained_weights(mu, sigma, cfg);
    if (!s.converged) throw NumericError("constrained weight solver did not converge");
    return s.weights;
}

DecisionDraws posterior_weights(const Matrix& mu, std::span<const Matrix> covariances, const DecisionConfig& cfg) {
    cfg.validate();
    const Index m_total = mu.rows();
    if (static_cast<Index>(covariances.size()) != m_total)
        throw std::invalid_argument("mean and covariance draw counts differ");
    DecisionDraws out;
    out.rule = cfg.rule;
    out.gamma = cfg.gamma;
    std::vector<Vector> weights;
    std::vector<double> e, v, u;
    for (Index m = 0; m < m_total; ++m) {
        const Matrix& h = covariances[static_cast<std::size_t>(m)];
        const Vector mean = mu.row(m).transpose();
        Vector p;
        try {
            p = optimal_weights(mean, h, cfg);
        } catch (const NumericError&) {
            ++out.excluded;
            continue;
        }
        const double expected = p.dot(mean);
        const double variance = std::max(0.0, p.dot(h * p));
        weights.push_back(p);
        e.push_back(expected);
        v.push_back(variance);
        u.push_back(expected - 0.5 * cfg.gamma * variance);
        out.source.push_back(m);
    }
    const auto n = static_cast<Index>(weights.size());
    out.weights.resize(n, mu.cols());
    for (Index i = 0; i < n; ++i) out.weights.row(i) = weights[static_cast<std::size_t>(i)].transpose();
    out.expected = Eigen::Map<const Vector>(e.data(), n);
    out.variance = Eigen::Map<const Vector>(v.data(), n);
    out.utility = Eigen::Map<const Vector>(u.data(), n);
    return out;
}

DecisionDraws posterior_weights(const PredictiveDraws& pd, const DecisionConfig& cfg) {
    return posterior_weights(pd.mu, pd.adjusted_covariance, cfg);
}

Vector predictive_point_weights(const Matrix& sample, const DecisionConfig& cfg) {
    if (sample.rows() == 0) throw std::invalid_argument("empty predictive sample");
    const Vector mean = sample.colwise().mean().transpose();
    const Matrix centred = sample.rowwise() - mean.transpose();
    const Matrix cov = (centred.transpose() * centred) / static_cast<double>(sample.rows());
    if (!is_symmetric_pd(cov)) throw NumericError("predictive sample covariance is singular");
    return optimal_weights(mean, cov, cfg);
}

double hedge_ratio(double h12, double h22, double mu_futures, const DecisionConfig& cfg) {
    if (!(h22 > 0.0)) throw NumericError("futures variance must be positive");
    if (cfg.rule == Rule::gmv) return h12 / h22;
    return (cfg.gamma * h12 - mu_futures) / (cfg.gamma * h22);
}

HedgedMoments hedged_moments(double d, const Vector& mu, const Matrix& h) {
    return {mu(0) - d * mu(1), h(0, 0) - 2.0 * d * h(0, 1) + d * d * h(1, 1)};
}

DecisionDraws hedge_ratios(const Matrix& mu, std::span<const Matrix> covariances, const DecisionConfig& cfg) {
    cfg.validate();
    if (mu.cols() != 2) throw std::invalid_argument("hedging needs exactly two assets (portfolio, futures)");
    const Index m_total = mu.rows();
    if (static_cast<Index>(covariances.size()) != m_total)
        throw std::invalid_argument("mean and covariance draw counts differ");
    DecisionDraws out;
    out.rule = cfg.rule;
    out.gamma = cfg.gamma;
    std::vector<double> d, e, v, u;
    for (Index m = 0; m < m_total; ++m) {
        const Matrix& h = covariances[static_cast<std::size_t>(m)];
        if (!is_symmetric_pd(h)) {
            ++out.excluded;
            continue;
        }
        const Vector mean = mu.row(m).transpose();
        const double ratio = hedge_ratio(h(0, 1), h(1, 1), mean(1), cfg);
        const HedgedMoments hm = hedged_moments(ratio, mean, h);
        d.push_back(ratio);
        e.push_back(hm.expected);
        v.push_back(std::max(0.0, hm.variance));
        u.push_back(hm.expected - 0.5 * cfg.gamma * v.back());
        out.source.push_back(m);
    }
    const auto n = static_cast<Index>(d.size());
    out.hedge_ratio = Eigen::Map<const Vector>(d.data(), n);
    out.expected = Eigen::Map<const Vector>(e.data(), n);
    out.variance = Eigen::Map<const Vector>(v.data(), n);
    out.utility = Eigen::Map<const Vector>(u.data(), n);
    return out;
}

DecisionDraws hedge_ratios(const PredictiveDraws& pd, const DecisionConfig& cfg) {
    return hedge_ratios(pd.mu, pd.adjusted_covariance, cfg);
}

double futures_contracts(double d, double r_portfolio, double r_futures, const DecisionConfig& cfg) {
    if (!(cfg.price_portfolio > 0.0) || !(cfg.price_futures > 0.0))
        throw std::invalid_argument("portfolio and futures prices must be positive");
    if (!(cfg.multiplier > 0.0)) throw std::invalid_argument("contract multiplier must be positive");
    const double value_portfolio = cfg.price_portfolio * std::exp(r_portfolio / 100.0);
    const double value_futures = cfg.price_futures * std::exp(r_futures / 100.0);
    return d * (cfg.shares / cfg.multiplier) * value_portfolio / value_futures;
}

Vector futures_contracts(const Vector& d, const Vector& r_portfolio, const Vector& r_futures,
                         const DecisionConfig& cfg) {
    if (r_portfolio.size() != d.size() || r_futures.size() != d.size())
        throw std::invalid_argument("hedge ratio and return draw counts differ");
    Vector n(d.size());
    for (Index m = 0; m < d.size(); ++m) n(m) = futures_contracts(d(m), r_portfolio(m), r_futures(m), cfg);
    return n;
}

long round_contracts(double n) { return std::lround(n); }

}  // namespace dpmgarch
