#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpmgarch/data.hpp"
#include "dpmgarch/mgarch.hpp"
#include "dpmgarch/random.hpp"

namespace dpmgarch {

enum class ErrorKind { gaussian, student_t, mixture };

/// Distribution of the model errors e_t in r_t = mu + H_t^{1/2} e_t.
struct ErrorSpec {
    ErrorKind kind = ErrorKind::gaussian;
    Index dimension = 2;
    double nu = 8.0;            // student_t degrees of freedom
    bool standardized = false;  // student_t rescaled to unit covariance
    Vector weights;             // mixture weights
    std::vector<Matrix> covariances;  // mixture component covariances (zero means)

    static ErrorSpec gaussian(Index k = 2);
    /// Scale matrix I; covariance nu/(nu-2) I unless standardized.
    static ErrorSpec student_t(Index k = 2, double nu = 8.0, bool standardized = false);
    /// 0.9 N(0, [[0.8, 0.0849], [0.0849, 0.9]]) + 0.1 N(0, [[2.8, -0.7637], [-0.7637, 1.9]]).
    static ErrorSpec two_component_mixture();
    /// Named presets "gaussian", "student_t", "mixture"; throws std::invalid_argument.
    static ErrorSpec preset(const std::string& name);

    void validate() const;
    Vector draw(Rng& rng) const;
};

std::string to_string(ErrorKind k);

struct Moments {
    Vector mean;
    Matrix covariance;
};
Moments mixture_moments(const ErrorSpec& spec);

struct SimulatedSeries {
    ReturnSeries series;
    VolatilityPath truth;  // generator-side path; model_errors holds the drawn e_t
    /// Options that make filter_volatilities follow the generator exactly.
    FilterOptions filter_options;
};

/// D_0^2 = omega / (1 - alpha - beta - phi/2) per asset.
Vector unconditional_variance(const GarchParams& p);

/// Forward simulation from S = I, D_0^2 = unconditional variance, Q_0 = I and
/// zero pre-sample shocks. Timestamps are consecutive calendar days from
/// 2000-01-01. Throws std::invalid_argument for invalid parameters or spec.
SimulatedSeries generate_series(const GarchParams& p, Index observations, const ErrorSpec& spec,
                                std::uint64_t seed);

}  // namespace dpmgarch
