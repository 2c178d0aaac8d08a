#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpmgarch/dpm.hpp"
#include "dpmgarch/mgarch.hpp"
#include "dpmgarch/random.hpp"
#include "dpmgarch/sampler.hpp"

namespace dpmgarch {

struct PredictivePrecision {
    Matrix precision;
    bool fresh = false;  // drawn beyond the stored truncation (base measure)
    Index component = -1;
};

/// Draw Lambda_{z_{T+1}}: r ~ U(0,1) selects the component whose cumulative
/// weight interval contains r; beyond sum(rho) new sticks v ~ Beta(1, c) with
/// base-measure precisions are generated until the interval is found.
PredictivePrecision sample_predictive_precision(const DpmSnapshot& s, const DpmHyper& h, Rng& rng);

struct OneStepCovariance {
    Matrix h;         // H_{T+1}
    Matrix adjusted;  // H*_{T+1}
};
OneStepCovariance one_step_covariance(const GarchParams& p, const VolatilityPath& path, const Matrix& precision);

enum class PredictiveScheme {
    collection,  // keep Lambda_{z_{T+1},m} and H*_{T+1,m}, n_per_draw returns each
    single,      // one error draw per retained iteration
};

struct PredictiveDraws {
    Index assets = 0;
    Matrix mu;  // M x K
    std::vector<Matrix> precision;
    std::vector<Matrix> next_covariance;      // H_{T+1,m}
    std::vector<Matrix> adjusted_covariance;  // H*_{T+1,m}
    std::vector<bool> fresh;
    Matrix returns;          // (M * n_per_draw) x K, rows grouped by draw
    Matrix errors;           // H_{T+1,m}^{-1/2} (r - mu_m), same layout
    int n_per_draw = 0;
    std::size_t excluded = 0;  // draws dropped because H* failed to factorize

    Index size() const { return mu.rows(); }
};

struct PredictiveOptions {
    int n_per_draw = 5;
    std::uint64_t seed = 1;
    PredictiveScheme scheme = PredictiveScheme::collection;
};

/// Precisions and adjusted covariances for every retained draw, then the
/// return sample. Each draw m uses the substream ("predictive", m).
PredictiveDraws predictive_from_posterior(const PosteriorDraws& draws, const PredictiveOptions& opts);

/// Assemble from stored per-draw ingredients (mu, H_{T+1}, snapshot); the
/// form used when draws come back from files.
PredictiveDraws predictive_from_parts(const Matrix& mu, std::span<const Matrix> next_covariance,
                                      std::span<const DpmSnapshot> states, const DpmHyper& hyper,
                                      const PredictiveOptions& opts);

/// r = mu_m + L* z, z ~ N(0, I), L* the lower factor of H*_{T+1,m}; fills
/// pd.returns and pd.errors. n_per_draw = 0 yields an empty sample.
void sample_predictive_returns(PredictiveDraws& pd, int n_per_draw, std::uint64_t seed);

struct DensityGrid {
    double lower = -5.0;
    double upper = 5.0;
    int points = 201;
    double bandwidth = 0.0;  // <= 0: Silverman's rule
};

struct DensityTable {
    std::vector<double> grid;
    std::vector<double> density;
    double bandwidth = 0.0;
    std::vector<std::pair<double, double>> quantiles;  // (probability, value)
};

/// 0.9 min(sd, IQR/1.34) n^{-1/5}.
double silverman_bandwidth(std::span<const double> sample);

/// Gaussian-kernel density on the grid plus a quantile table.
DensityTable density_export(std::span<const double> sample, const DensityGrid& grid);

/// Fraction of the sample strictly above q.
double tail_probability(std::span<const double> sample, double q);

}  // namespace dpmgarch
