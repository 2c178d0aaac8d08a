#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dpmgarch/dpm.hpp"
#include "dpmgarch/mgarch.hpp"
#include "dpmgarch/random.hpp"
#include "dpmgarch/summary.hpp"

namespace dpmgarch {

enum class ErrorModel { gaussian, dpm };
std::string to_string(ErrorModel m);
ErrorModel parse_error_model(const std::string& s);

struct McmcConfig {
    int burn_in = 10000;
    int draws = 20000;
    int thin = 1;
    std::uint64_t seed = 1;
    Variant variant = Variant::scalar;
    ErrorModel error_model = ErrorModel::dpm;
    std::optional<DpmHyper> hyper;  // default DpmHyper::defaults(K)

    int adapt_window = 50;
    double accept_low = 0.20;
    double accept_high = 0.50;
    double scale_up = 1.1;
    double scale_down = 0.9;
    double scale_floor = 1e-6;
    /// Replace each block's diagonal proposal shape by the empirical
    /// covariance of the second burn-in quarter, at mid burn-in.
    bool learn_covariance = true;
    /// Recompute S from every candidate's standardized residuals (false: hold
    /// S fixed at the starting point's value).
    bool refresh_target = true;
    /// Start from the Gaussian ML fit unless `start` is given.
    bool ml_start = true;
    std::optional<GarchParams> start;
    int max_numeric_failures = 1000;

    int retained() const { return draws / thin; }
    void validate() const;
};

/// One random-walk block: candidate = current + scale * shape * z on
/// `indices` of the flattened parameter vector; `shape` is lower triangular.
struct ProposalBlock {
    std::string name;
    std::vector<Index> indices;
    Matrix shape;
    double scale = 1.0;
};

/// Blocks (mu), (omega_i, alpha_i, beta_i, phi_i) per asset and
/// (kappa, lambda, delta), with heuristic diagonal shapes.
std::vector<ProposalBlock> default_blocks(const GarchParams& start, const Matrix& returns);

struct BlockStats {
    std::string name;
    long proposed = 0;
    long accepted = 0;
    long constraint_rejections = 0;
    double final_scale = 1.0;
    double acceptance() const { return proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
};

/// Log target over the flattened parameter vector; -inf outside the support.
using LogTarget = std::function<double(const Vector&)>;

/// Uniform prior on the constraint region times the mixture likelihood.
LogTarget make_log_target(const Matrix& returns, Variant variant, std::vector<int> allocation,
                          std::vector<Matrix> precisions, FilterOptions opts = {});

double acceptance_probability(double current_log_target, double candidate_log_target);

struct MhOutcome {
    Vector params;
    double log_target;
    bool accepted = false;
    bool outside_support = false;
};

MhOutcome rwmh_step(const Vector& current, double current_log_target, const ProposalBlock& block,
                    const LogTarget& target, Rng& rng);

/// x1.1 above the band, x0.9 below it, never below `floor`.
double adapt_scale(double window_acceptance, double scale, double low, double high, double up, double down,
                   double floor);

struct PosteriorDraws {
    Variant variant = Variant::scalar;
    ErrorModel error_model = ErrorModel::dpm;
    Index assets = 0;
    std::size_t observations = 0;
    std::vector<std::string> names;
    Matrix params;  // M x P
    Vector log_likelihood;
    Vector concentration;
    std::vector<int> max_allocation;
    std::vector<int> occupied;
    std::vector<DpmSnapshot> states;
    std::vector<Matrix> next_covariance;  // H_{T+1} per draw
    std::vector<BlockStats> burn_in_stats;
    std::vector<BlockStats> retained_stats;
    GarchParams start;
    bool ml_start_used = false;
    DpmHyper hyper;
    std::uint64_t seed = 0;
    int chains = 1;
    long numeric_failures = 0;
    double wall_seconds = 0.0;
    std::vector<std::string> warnings;

    Index size() const { return params.rows(); }
    GarchParams draw(Index m) const { return GarchParams::unflatten(variant, assets, params.row(m).transpose()); }
};

/// Full posterior simulation. Bit-for-bit reproducible for a fixed seed.
/// Throws NumericError when candidate filtering fails more than
/// cfg.max_numeric_failures times.
PosteriorDraws run_mcmc(const McmcConfig& cfg, const Matrix& returns, int chain_index = 0);

/// Independent chains on separate substreams, concatenated in chain order.
PosteriorDraws run_mcmc_chains(const McmcConfig& cfg, const Matrix& returns, int chains);

struct ParameterSummary {
    std::string name;
    Summary summary;
};
std::vector<ParameterSummary> summarize_draws(const PosteriorDraws& d);

}  // namespace dpmgarch
