#pragma once

#include <span>
#include <string>
#include <vector>

#include "dpmgarch/linalg.hpp"
#include "dpmgarch/predictive.hpp"

namespace dpmgarch {

enum class Rule { utility, gmv };
std::string to_string(Rule r);
Rule parse_rule(const std::string& s);

struct DecisionConfig {
    double gamma = 0.03;
    Rule rule = Rule::utility;
    bool short_sale_allowed = true;
    double shares = 1000.0;
    double multiplier = 50.0;
    double price_portfolio = 0.0;
    double price_futures = 0.0;

    /// Hedging defaults: gamma = 0.3.
    static DecisionConfig hedging();
    void validate() const;
};

/// Closed-form weights on the budget constraint sum(p) = 1.
/// utility: (1/gamma)(S^{-1}mu - ((1'S^{-1}mu - gamma)/(1'S^{-1}1)) S^{-1}1)
/// gmv:     S^{-1}1 / (1'S^{-1}1)
/// Throws NumericError when `sigma` is not positive definite.
Vector static_weights(const Vector& mu, const Matrix& sigma, const DecisionConfig& cfg);

/// Minimisation form of the rule: (gamma/2) p'Sp - p'mu, or p'Sp/2 for gmv.
double portfolio_objective(const Vector& p, const Vector& mu, const Matrix& sigma, const DecisionConfig& cfg);

struct ConstrainedSolution {
    Vector weights;
    bool converged = false;
    int iterations = 0;
    double kkt_residual = 0.0;
    std::string method;  // "closed-form", "clamp", "active-set", "projected-gradient"
};

/// Long-only weights (p >= 0, sum(p) = 1). Unconstrained optimum returned when
/// it is already feasible; K = 2 is solved by clamping, larger K by an active
/// set method with a projected-gradient fallback.
ConstrainedSolution constrained_weights(const Vector& mu, const Matrix& sigma, const DecisionConfig& cfg);

/// Closed form or constrained, according to cfg.short_sale_allowed.
Vector optimal_weights(const Vector& mu, const Matrix& sigma, const DecisionConfig& cfg);

/// Euclidean projection onto the probability simplex.
Vector project_simplex(const Vector& v);

struct DecisionDraws {
    Rule rule = Rule::utility;
    double gamma = 0.0;
    Matrix weights;       // allocation: M x K
    Vector hedge_ratio;   // hedging: M
    Vector expected;      // E[r^P] (hedged portfolio when hedging)
    Vector variance;      // Var[r^P]
    Vector utility;       // E - (gamma/2) Var
    Vector contracts;     // N*, filled by futures_contracts
    std::vector<Index> source;  // index of the predictive draw behind each row
    std::size_t excluded = 0;

    Index size() const { return expected.size(); }
};

/// Per-draw weights with Sigma = H*_{T+1,m} and mu = mu_m. Draws whose H* is
/// not positive definite are dropped and counted.
DecisionDraws posterior_weights(const PredictiveDraws& pd, const DecisionConfig& cfg);
DecisionDraws posterior_weights(const Matrix& mu, std::span<const Matrix> covariances, const DecisionConfig& cfg);

/// Weights maximising the sample average of p'r - (gamma/2)(p'r - p'rbar)^2
/// (or minimising the sample variance for gmv): the closed form at the sample
/// mean and the 1/M sample covariance.
Vector predictive_point_weights(const Matrix& sample, const DecisionConfig& cfg);

/// Hedge ratio for portfolio/futures covariance entries.
/// utility: (gamma H12 - mu_F)/(gamma H22); gmv: H12/H22.
double hedge_ratio(double h12, double h22, double mu_futures, const DecisionConfig& cfg);

/// Mean and variance of r^P - D r^F.
struct HedgedMoments {
    double expected;
    double variance;
};
HedgedMoments hedged_moments(double d, const Vector& mu, const Matrix& h);

/// K = 2 only: column 0 the spot portfolio, column 1 the futures.
DecisionDraws hedge_ratios(const PredictiveDraws& pd, const DecisionConfig& cfg);
DecisionDraws hedge_ratios(const Matrix& mu, std::span<const Matrix> covariances, const DecisionConfig& cfg);

/// N* = D (shares/multiplier) P^P e^{r^P/100} / (P^F e^{r^F/100}).
double futures_contracts(double d, double r_portfolio, double r_futures, const DecisionConfig& cfg);
Vector futures_contracts(const Vector& d, const Vector& r_portfolio, const Vector& r_futures, const DecisionConfig& cfg);

/// Nearest integer, halves away from zero.
long round_contracts(double n);

}  // namespace dpmgarch
