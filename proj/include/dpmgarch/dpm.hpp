#pragma once

#include <cstddef>
#include <vector>

#include "dpmgarch/linalg.hpp"
#include "dpmgarch/random.hpp"

namespace dpmgarch {

/// Cluster count entering the concentration update: the number of occupied
/// components, or the largest allocated label.
enum class ClusterCount { occupied, max_label };

/// Hyperparameters of the Dirichlet-process scale mixture.
///
/// `df` follows the shifted Wishart convention: the classical degrees of
/// freedom are df + K - 1 and E[Lambda] = (df + K - 1) * base_scale. The
/// default base_scale = I / (df + K - 1) centres the prior precision at I.
struct DpmHyper {
    double a0 = 2.0;  // Gamma shape of the concentration prior
    double b0 = 2.0;  // Gamma rate of the concentration prior
    double df = 0.0;
    Matrix base_scale;
    int max_components = 512;
    ClusterCount concentration_count = ClusterCount::occupied;

    static DpmHyper defaults(Index assets);
    /// Defaults with a different df; base_scale follows.
    static DpmHyper with_df(Index assets, double df);

    Index assets() const { return base_scale.rows(); }
    double wishart_dof() const { return df + static_cast<double>(assets()) - 1.0; }
    void validate() const;
};

/// Truncated stick-breaking state of the slice sampler. Components are
/// 0-based; `allocation[t]` indexes `precisions`.
struct DpmState {
    Vector sticks;   // v_j
    Vector weights;  // rho_j
    std::vector<Matrix> precisions;
    std::vector<int> allocation;
    Vector slices;  // u_t
    double concentration = 1.0;
    std::vector<int> counts;  // n_j, same length as precisions

    std::size_t components() const { return precisions.size(); }
    std::size_t observations() const { return allocation.size(); }
    /// z* as a count: 1 + the largest allocated 0-based index.
    int max_allocation() const;
    int occupied() const;
    double min_slice() const;
    void refresh_counts();
};

/// rho_1 = v_1, rho_j = v_j prod_{l<j}(1 - v_l).
Vector stick_breaking_weights(const Vector& sticks);

/// Single-component start: v_1 = 0.5, Lambda_1 = I, all z_t = 0, c = 1.
DpmState initial_dpm_state(std::size_t observations, Index assets);

/// Mixture weight pi_xi of the first Gamma in the concentration update.
double concentration_mixture_weight(double a0, double b0, int zstar, std::size_t observations, double xi);
/// c | xi ~ pi G(a0+z*, b0-log xi) + (1-pi) G(a0+z*-1, b0-log xi).
double sample_concentration_given_aux(double a0, double b0, int zstar, std::size_t observations, double xi, Rng& rng);
/// Step 1: xi ~ Beta(c+1, T), then c from the two-Gamma mixture with z*
/// taken per h.concentration_count.
double sample_concentration(DpmState& s, const DpmHyper& h, Rng& rng);

/// Step 2: v_j ~ Beta(n_j + 1, T - sum_{l<=j} n_l + c) for j < z*; the state
/// is truncated to z* components.
void sample_stick_weights(DpmState& s, Rng& rng);

/// Step 3: u_t ~ U(0, rho_{z_t}).
void sample_slices(DpmState& s, Rng& rng);

/// Step 4: append components (v ~ Beta(1, c), Lambda ~ base Wishart) until
/// sum_j rho_j > 1 - min_t u_t. Throws NumericError past max_components.
void extend_sticks(DpmState& s, const DpmHyper& h, Rng& rng);

/// (V^{-1} + sum_{t in j} e_t e_t')^{-1}.
Matrix precision_posterior_scale(const DpmHyper& h, const Matrix& scatter);

/// Step 5: Lambda_j ~ W(df + n_j, (V^{-1} + scatter_j)^{-1}) in the shifted
/// convention; empty components are drawn from the base measure.
void sample_precisions(DpmState& s, const DpmHyper& h, const Matrix& errors, Rng& rng);

/// P(z_t = j) over all current components for one error vector.
Vector allocation_probabilities(const DpmState& s, const Vector& error, double slice);

/// Step 6: z_t drawn from allocation_probabilities; counts refreshed.
void sample_allocations(DpmState& s, const Matrix& errors, Rng& rng);

/// Steps 1-6 in order.
void dpm_sweep(DpmState& s, const DpmHyper& h, const Matrix& errors, Rng& rng);

struct MixtureDensity {
    double value;
    double truncation_mass;  // 1 - sum_j rho_j
};

/// sum_j rho_j N_K(e | 0, Lambda_j^{-1}) over the current truncation.
MixtureDensity mixture_density(const Vector& error, const DpmState& s);

/// f(e, u) = sum_j 1(u < rho_j) N_K(e | 0, Lambda_j^{-1}).
double slice_joint_density(const Vector& error, double slice, const DpmState& s);

/// Compact per-draw record of the mixture (no per-observation fields).
struct DpmSnapshot {
    double concentration = 1.0;
    Vector sticks;
    Vector weights;
    std::vector<Matrix> precisions;
    std::vector<int> counts;
};
DpmSnapshot snapshot(const DpmState& s);

}  // namespace dpmgarch
