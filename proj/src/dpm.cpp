#include "dpmgarch/dpm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpmgarch {

namespace {

// Keeps every weight strictly positive so that slices stay nondegenerate.
constexpr double kStickCeiling = 1.0 - 1e-15;
constexpr double kStickFloor = 1e-300;

double clamp_stick(double v) { return std::clamp(v, kStickFloor, kStickCeiling); }

}  // namespace

DpmHyper DpmHyper::defaults(Index k) { return with_df(k, static_cast<double>(k)); }

DpmHyper DpmHyper::with_df(Index k, double df) {
    DpmHyper h;
    h.df = df;
    h.base_scale = Matrix::Identity(k, k) / (df + static_cast<double>(k) - 1.0);
    return h;
}

void DpmHyper::validate() const {
    if (!(a0 > 0.0) || !(b0 > 0.0)) throw std::invalid_argument("concentration hyperparameters must be positive");
    if (!(df > 0.0)) throw std::invalid_argument("Wishart df must be positive");
    if (!is_symmetric_pd(base_scale)) throw std::invalid_argument("Wishart base scale must be symmetric PD");
    if (max_components < 1) throw std::invalid_argument("component cap must be at least 1");
}

int DpmState::max_allocation() const {
    return allocation.empty() ? 0 : 1 + *std::max_element(allocation.begin(), allocation.end());
}

int DpmState::occupied() const {
    return static_cast<int>(std::count_if(counts.begin(), counts.end(), [](int n) { return n > 0; }));
}

double DpmState::min_slice() const { return slices.size() == 0 ? 1.0 : slices.minCoeff(); }

void DpmState::refresh_counts() {
    counts.assign(precisions.size(), 0);
    for (int z : allocation) ++counts[static_cast<std::size_t>(z)];
}

Vector stick_breaking_weights(const Vector& sticks) {
    Vector w(sticks.size());
    double remaining = 1.0;
    for (Index j = 0; j < sticks.size(); ++j) {
        w(j) = sticks(j) * remaining;
        remaining *= 1.0 - sticks(j);
    }
    return w;
}

DpmState initial_dpm_state(std::size_t n, Index k) {
    DpmState s;
    s.sticks = Vector::Constant(1, 0.5);
    s.weights = stick_breaking_weights(s.sticks);
    s.precisions = {Matrix::Identity(k, k)};
    s.allocation.assign(n, 0);
    s.slices = Vector::Constant(static_cast<Index>(n), 0.25);
    s.concentration = 1.0;
    s.refresh_counts();
    return s;
}

double concentration_mixture_weight(double a0, double b0, int zstar, std::size_t n, double xi) {
    const double shape = a0 + zstar - 1.0;
    if (shape <= 0.0) return 1.0;
    const double rate = b0 - std::log(xi);
    return shape / (shape + static_cast<double>(n) * rate);
}

double sample_concentration_given_aux(double a0, double b0, int zstar, std::size_t n, double xi, Rng& rng) {
    const double pi = concentration_mixture_weight(a0, b0, zstar, n, xi);
    const double rate = b0 - std::log(xi);
    const double shape = rng.uniform() < pi ? a0 + zstar : a0 + zstar - 1.0;
    return std::max(rng.gamma(shape, rate), std::numeric_limits<double>::min());
}

double sample_concentration(DpmState& s, const DpmHyper& h, Rng& rng) {
    const std::size_t n = s.observations();
    const double xi = std::max(rng.beta(s.concentration + 1.0, static_cast<double>(n)), std::numeric_limits<double>::min());
    const int clusters = h.concentration_count == ClusterCount::occupied ? s.occupied() : s.max_allocation();
    s.concentration = sample_concentration_given_aux(h.a0, h.b0, clusters, n, xi, rng);
    return s.concentration;
}

void sample_stick_weights(DpmState& s, Rng& rng) {
    const int zstar = s.max_allocation();
    s.refresh_counts();
    const double n = static_cast<double>(s.observations());
    Vector sticks(zstar);
    double cumulative = 0.0;
    for (int j = 0; j < zstar; ++j) {
        const double nj = s.counts[static_cast<std::size_t>(j)];
        cumulative += nj;
        sticks(j) = clamp_stick(rng.beta(nj + 1.0, n - cumulative + s.concentration));
    }
    s.sticks = std::move(sticks);
    s.weights = stick_breaking_weights(s.sticks);
    s.precisions.resize(static_cast<std::size_t>(zstar));
    s.counts.resize(static_cast<std::size_t>(zstar));
}

void sample_slices(DpmState& s, Rng& rng) {
    s.slices.resize(static_cast<Index>(s.observations()));
    for (std::size_t t = 0; t < s.observations(); ++t) {
        const double rho = s.weights(s.allocation[t]);
        s.slices(static_cast<Index>(t)) = rho * rng.uniform();
    }
}

void extend_sticks(DpmState& s, const DpmHyper& h, Rng& rng) {
    const double threshold = 1.0 - s.min_slice();
    double total = s.weights.sum();
    double remaining = 1.0;
    for (Index j = 0; j < s.sticks.size(); ++j) remaining *= 1.0 - s.sticks(j);
    while (!(total > threshold)) {
        if (static_cast<int>(s.components()) >= h.max_components)
            throw NumericError("stick-breaking extension exceeded " + std::to_string(h.max_components) + " components");
        const double v = clamp_stick(rng.beta(1.0, s.concentration));
        const Index j = s.sticks.size();
        s.sticks.conservativeResize(j + 1);
        s.weights.conservativeResize(j + 1);
        s.sticks(j) = v;
        s.weights(j) = v * remaining;
        remaining *= 1.0 - v;
        total += s.weights(j);
        s.precisions.push_back(rng.wishart(h.wishart_dof(), h.base_scale));
        s.counts.push_back(0);
        if (remaining <= 0.0) break;
    }
}

Matrix precision_posterior_scale(const DpmHyper& h, const Matrix& scatter) {
    return inverse_pd(Matrix(inverse_pd(h.base_scale) + scatter));
}

void sample_precisions(DpmState& s, const DpmHyper& h, const Matrix& errors, Rng& rng) {
    const Index k = errors.cols();
    std::vector<Matrix> scatter(s.components(), Matrix::Zero(k, k));
    for (std::size_t t = 0; t < s.observations(); ++t) {
        const auto e = errors.row(static_cast<Index>(t));
        scatter[static_cast<std::size_t>(s.allocation[t])].noalias() += e.transpose() * e;
    }
    s.refresh_counts();
    for (std::size_t j = 0; j < s.components(); ++j) {
        if (s.counts[j] == 0) {
            s.precisions[j] = rng.wishart(h.wishart_dof(), h.base_scale);
        } else {
            s.precisions[j] = rng.wishart(h.wishart_dof() + s.counts[j], precision_posterior_scale(h, scatter[j]));
        }
    }
}

namespace {

struct ComponentTerms {
    std::vector<double> half_log_det;
};

ComponentTerms component_terms(const DpmState& s) {
    ComponentTerms c;
    c.half_log_det.reserve(s.components());
    for (const auto& p : s.precisions) c.half_log_det.push_back(0.5 * log_determinant_pd(p));
    return c;
}

void fill_probabilities(const DpmState& s, const ComponentTerms& terms, const Vector& e, double slice, Vector& prob) {
    const auto m = static_cast<Index>(s.components());
    prob.resize(m);
    double best = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < m; ++j) {
        if (s.weights(j) > slice) {
            const auto uj = static_cast<std::size_t>(j);
            prob(j) = terms.half_log_det[uj] - 0.5 * e.dot(s.precisions[uj] * e);
            best = std::max(best, prob(j));
        } else {
            prob(j) = -std::numeric_limits<double>::infinity();
        }
    }
    if (!std::isfinite(best)) throw std::logic_error("slice set is empty; the stick extension invariant is broken");
    // Scalar exp: the vectorized one maps -inf to a denormal, not 0.
    for (Index j = 0; j < m; ++j) prob(j) = std::exp(prob(j) - best);
    prob /= prob.sum();
}

}  // namespace

Vector allocation_probabilities(const DpmState& s, const Vector& error, double slice) {
    Vector prob;
    fill_probabilities(s, component_terms(s), error, slice, prob);
    return prob;
}

void sample_allocations(DpmState& s, const Matrix& errors, Rng& rng) {
    const ComponentTerms terms = component_terms(s);
    Vector prob;
    for (std::size_t t = 0; t < s.observations(); ++t) {
        const Vector e = errors.row(static_cast<Index>(t)).transpose();
        fill_probabilities(s, terms, e, s.slices(static_cast<Index>(t)), prob);
        double u = rng.uniform();
        Index chosen = prob.size() - 1;
        for (Index j = 0; j < prob.size(); ++j) {
            u -= prob(j);
            if (u <= 0.0 && prob(j) > 0.0) {
                chosen = j;
                break;
            }
        }
        while (prob(chosen) <= 0.0) --chosen;
        s.allocation[t] = static_cast<int>(chosen);
    }
    s.refresh_counts();
}

void dpm_sweep(DpmState& s, const DpmHyper& h, const Matrix& errors, Rng& rng) {
    sample_concentration(s, h, rng);
    sample_stick_weights(s, rng);
    sample_slices(s, rng);
    extend_sticks(s, h, rng);
    sample_precisions(s, h, errors, rng);
    sample_allocations(s, errors, rng);
}

MixtureDensity mixture_density(const Vector& e, const DpmState& s) {
    double value = 0.0;
    for (std::size_t j = 0; j < s.components(); ++j)
        value += s.weights(static_cast<Index>(j)) * std::exp(log_normal_density_precision(e, s.precisions[j]));
    return {value, 1.0 - s.weights.sum()};
}

double slice_joint_density(const Vector& e, double slice, const DpmState& s) {
    double value = 0.0;
    for (std::size_t j = 0; j < s.components(); ++j)
        if (slice < s.weights(static_cast<Index>(j)))
            value += std::exp(log_normal_density_precision(e, s.precisions[j]));
    return value;
}

DpmSnapshot snapshot(const DpmState& s) {
    return {s.concentration, s.sticks, s.weights, s.precisions, s.counts};
}

}  // namespace dpmgarch
