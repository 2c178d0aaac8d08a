#include "dpmgarch/predictive.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dpmgarch/summary.hpp"

namespace dpmgarch {

PredictivePrecision sample_predictive_precision(const DpmSnapshot& s, const DpmHyper& h, Rng& rng) {
    const double r = rng.uniform();
    double cumulative = 0.0;
    for (Index j = 0; j < s.weights.size(); ++j) {
        cumulative += s.weights(j);
        if (r < cumulative) return {s.precisions[static_cast<std::size_t>(j)], false, j};
    }
    double remaining = std::max(0.0, 1.0 - cumulative);
    const double c = s.concentration > 0.0 ? s.concentration : 1.0;
    for (Index j = s.weights.size(); j < h.max_components; ++j) {
        const double v = rng.beta(1.0, c);
        const double w = v * remaining;
        remaining *= 1.0 - v;
        cumulative += w;
        if (r < cumulative || remaining <= 0.0) return {rng.wishart(h.wishart_dof(), h.base_scale), true, j};
    }
    throw NumericError("predictive stick extension exceeded " + std::to_string(h.max_components) + " components");
}

OneStepCovariance one_step_covariance(const GarchParams& p, const VolatilityPath& path, const Matrix& precision) {
    OneStepCovariance out;
    out.h = next_step(p, path).h;
    out.adjusted = adjusted_covariance(out.h, precision);
    return out;
}

PredictiveDraws predictive_from_parts(const Matrix& mu, std::span<const Matrix> next_covariance,
                                      std::span<const DpmSnapshot> states, const DpmHyper& hyper,
                                      const PredictiveOptions& opts) {
    const Index m_total = mu.rows();
    if (static_cast<Index>(next_covariance.size()) != m_total || static_cast<Index>(states.size()) != m_total)
        throw std::invalid_argument("predictive inputs have inconsistent draw counts");
    PredictiveDraws pd;
    pd.assets = mu.cols();
    std::vector<Index> keep;
    keep.reserve(static_cast<std::size_t>(m_total));
    for (Index m = 0; m < m_total; ++m) {
        const auto um = static_cast<std::size_t>(m);
        Rng rng = Rng::derive(opts.seed, "predictive-precision", static_cast<std::uint64_t>(m));
        PredictivePrecision prec = sample_predictive_precision(states[um], hyper, rng);
        Matrix adjusted;
        try {
            adjusted = adjusted_covariance(next_covariance[um], prec.precision);
        } catch (const NumericError&) {
            ++pd.excluded;
            continue;
        }
        keep.push_back(m);
        pd.precision.push_back(std::move(prec.precision));
        pd.fresh.push_back(prec.fresh);
        pd.next_covariance.push_back(next_covariance[um]);
        pd.adjusted_covariance.push_back(std::move(adjusted));
    }
    pd.mu.resize(static_cast<Index>(keep.size()), mu.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) pd.mu.row(static_cast<Index>(i)) = mu.row(keep[i]);
    const int n = opts.scheme == PredictiveScheme::single ? 1 : opts.n_per_draw;
    sample_predictive_returns(pd, n, opts.seed);
    return pd;
}

PredictiveDraws predictive_from_posterior(const PosteriorDraws& d, const PredictiveOptions& opts) {
    Matrix mu = d.params.leftCols(d.assets);
    return predictive_from_parts(mu, d.next_covariance, d.states, d.hyper, opts);
}

void sample_predictive_returns(PredictiveDraws& pd, int n_per_draw, std::uint64_t seed) {
    if (n_per_draw < 0) throw std::invalid_argument("n_per_draw must be non-negative");
    const Index m_total = pd.size();
    const Index k = pd.assets;
    pd.n_per_draw = n_per_draw;
    pd.returns.resize(m_total * n_per_draw, k);
    pd.errors.resize(m_total * n_per_draw, k);
    for (Index m = 0; m < m_total; ++m) {
        const auto um = static_cast<std::size_t>(m);
        Rng rng = Rng::derive(seed, "predictive-returns", static_cast<std::uint64_t>(m));
        const Matrix l_adj = lower_sqrt(pd.adjusted_covariance[um], "H*");
        const Matrix l_h = lower_sqrt(pd.next_covariance[um], "H");
        for (int i = 0; i < n_per_draw; ++i) {
            const Index row = m * n_per_draw + i;
            const Vector shock = l_adj * rng.normal_vector(k);
            pd.returns.row(row) = pd.mu.row(m) + shock.transpose();
            pd.errors.row(row) = l_h.triangularView<Eigen::Lower>().solve(shock).transpose();
        }
    }
}

double silverman_bandwidth(std::span<const double> sample) {
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const Summary s = summarize(sample);
    const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    double spread = s.sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
    return 0.9 * spread * std::pow(static_cast<double>(sample.size()), -0.2);
}

DensityTable density_export(std::span<const double> sample, const DensityGrid& grid) {
    if (sample.empty()) throw std::invalid_argument("density of an empty sample");
    if (grid.points < 1 || !(grid.upper >= grid.lower)) throw std::invalid_argument("invalid density grid");
    DensityTable out;
    out.bandwidth = grid.bandwidth > 0.0 ? grid.bandwidth : silverman_bandwidth(sample);
    if (!(out.bandwidth > 0.0)) throw std::invalid_argument("degenerate sample: zero kernel bandwidth");
    const double norm = 1.0 / (static_cast<double>(sample.size()) * out.bandwidth * std::sqrt(2.0 * std::numbers::pi));
    const double step = grid.points > 1 ? (grid.upper - grid.lower) / (grid.points - 1) : 0.0;
    for (int g = 0; g < grid.points; ++g) {
        const double x = grid.lower + g * step;
        double acc = 0.0;
        for (double v : sample) {
            const double z = (x - v) / out.bandwidth;
            acc += std::exp(-0.5 * z * z);
        }
        out.grid.push_back(x);
        out.density.push_back(acc * norm);
    }
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    for (double p : {0.001, 0.005, 0.01, 0.025, 0.05, 0.25, 0.5, 0.75, 0.95, 0.975, 0.99, 0.995, 0.999})
        out.quantiles.emplace_back(p, quantile(sorted, p));
    return out;
}

double tail_probability(std::span<const double> sample, double q) {
    if (sample.empty()) throw std::invalid_argument("tail probability of an empty sample");
    const auto count = std::count_if(sample.begin(), sample.end(), [q](double v) { return v > q; });
    return static_cast<double>(count) / static_cast<double>(sample.size());
}

}  // namespace dpmgarch
