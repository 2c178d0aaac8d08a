#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpmgarch/linalg.hpp"

namespace dpmgarch {

/// Correlation dynamics: shared scalars (kappa, lambda, delta) or asset-specific
/// vectors.
enum class Variant { scalar, vector };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

/// GJR-AGDCC parameters. kappa, lambda, delta have length K for the vector
/// variant and length 1 for the scalar variant.
struct GarchParams {
    Variant variant = Variant::scalar;
    Vector mu, omega, alpha, beta, phi;
    Vector kappa, lambda, delta;

    Index assets() const { return mu.size(); }
    Index correlation_size() const { return variant == Variant::scalar ? 1 : assets(); }
    Index size() const { return 5 * assets() + 3 * correlation_size(); }

    /// Flattened layout: mu(K), omega(K), alpha(K), beta(K), phi(K), kappa, lambda, delta.
    Vector flatten() const;
    static GarchParams unflatten(Variant variant, Index assets, const Vector& flat);
    std::vector<std::string> names() const;
    static std::vector<std::string> names(Variant variant, Index assets);

    /// Every parameter set to the same value across assets.
    static GarchParams uniform(Variant variant, Index assets, double mu, double omega, double alpha, double beta,
                               double phi, double kappa, double lambda, double delta);

    /// Sampler starting point when no ML fit is available.
    static GarchParams sampler_default(Variant variant, const Vector& mean);
    /// Data-generating values used by the simulation presets.
    static GarchParams simulation_default(Variant variant, Index assets);
};

struct Violation {
    std::string constraint;  // e.g. "stationarity"
    Index asset = -1;        // -1 for shared (scalar-variant) constraints
    double value = 0.0;
    std::string describe() const;
};

/// Lower bound enforced on omega in place of omega >= 0.
inline constexpr double kOmegaFloor = 1e-12;

/// Check positivity and stationarity. With `allow_boundary` the open
/// intervals on alpha, beta, phi, kappa, lambda, delta become closed at 0
/// (admissible for filtering, outside the prior support).
std::vector<Violation> validate_params(const GarchParams& p, bool allow_boundary = false);
std::string describe(const std::vector<Violation>& v);

struct FilterOptions {
    /// Fixed correlation target S; by default S is the sample correlation of the
    /// standardized residuals of the current pass.
    std::optional<Matrix> target;
    /// D_0^2; default: sample variances of a_t.
    std::optional<Vector> initial_variance;
    /// Q_0; default: S.
    std::optional<Matrix> initial_q;
};

/// Filtered GJR-AGDCC path. Row t of every T x K matrix corresponds to return t.
struct VolatilityPath {
    Matrix residuals;     // a_t = r_t - mu
    Matrix variances;     // diagonal of D_t^2
    Matrix standardized;  // eps_t = D_t^{-1} a_t
    Matrix negative;      // eta_t = eps_t * 1(eps_t < 0)
    std::vector<Matrix> q, r, h;
    std::vector<Matrix> h_sqrt;  // lower Cholesky factor of H_t
    Matrix model_errors;         // H_t^{-1/2} a_t
    Vector log_det_h;
    Matrix target;  // S
    Vector initial_variance;
    Matrix initial_q;

    Index rows() const { return residuals.rows(); }
    Index assets() const { return residuals.cols(); }
};

/// Correlation recursion coefficients in Hadamard form:
/// Q_t = intercept * S + shock o eps eps' + persistence o Q + asymmetry o eta eta'.
struct CorrelationCoefficients {
    double intercept;
    Matrix shock, persistence, asymmetry;
};
CorrelationCoefficients correlation_coefficients(const GarchParams& p);

/// State carried from one observation to the next.
struct StepState {
    Vector residual, variance, standardized, negative;
    Matrix q;
};

struct NextStep {
    Vector variance;  // D_{t+1}^2
    Matrix q, r, h;
};

/// One joint step of the GJR variance and AGDCC correlation recursions.
NextStep step_forward(const GarchParams& p, const CorrelationCoefficients& cc, const Matrix& target,
                      const StepState& prev);

/// Run the recursions over all rows of `returns` (T x K, T >= 2).
/// Throws std::invalid_argument on inadmissible parameters and NumericError
/// (naming t) when a Q_t or H_t is not positive definite after the ridge.
VolatilityPath filter_volatilities(const GarchParams& p, const Matrix& returns, const FilterOptions& opts = {});

/// H_{T+1} (and D^2, Q, R) advanced one step past the end of the path.
NextStep next_step(const GarchParams& p, const VolatilityPath& path);

/// H* = L Lambda^{-1} L' with L the lower Cholesky factor of H.
Matrix adjusted_covariance(const Matrix& h, const Matrix& precision);

/// Mixture log-likelihood given allocations z_t (0-based) and component
/// precisions: -1/2 sum(K log 2pi + log|H*_t| + a_t' H*_t^{-1} a_t).
double log_likelihood(const VolatilityPath& path, std::span<const int> allocation, std::span<const Matrix> precisions);
double log_likelihood(const GarchParams& p, const Matrix& returns, std::span<const int> allocation,
                      std::span<const Matrix> precisions, const FilterOptions& opts = {});
/// Same with every Lambda = I.
double gaussian_log_likelihood(const VolatilityPath& path);

struct UnconditionalMoments {
    Vector mean;
    Matrix covariance;  // T-1 denominator
    bool singular = false;
};
UnconditionalMoments unconditional_covariance(const Matrix& returns);

struct MlOptions {
    int max_evaluations = 20000;
    double tolerance = 1e-9;
    int restarts = 3;
};

struct MlFit {
    GarchParams params;
    double log_likelihood = 0.0;
    bool converged = false;
    int evaluations = 0;
    std::string status;
};

/// Gaussian maximum likelihood over the constraint region. A supplied start
/// outside the region is rejected with std::invalid_argument listing the
/// violations.
MlFit fit_ml_gaussian(const Matrix& returns, Variant variant, const std::optional<GarchParams>& start = std::nullopt,
                      const MlOptions& opts = {});

}  // namespace dpmgarch
