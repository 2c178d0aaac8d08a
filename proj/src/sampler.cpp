#include "dpmgarch/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dpmgarch {

std::string to_string(ErrorModel m) { return m == ErrorModel::gaussian ? "gaussian" : "dpm"; }

ErrorModel parse_error_model(const std::string& s) {
    if (s == "gaussian") return ErrorModel::gaussian;
    if (s == "dpm") return ErrorModel::dpm;
    throw std::invalid_argument("unknown error model '" + s + "' (expected gaussian|dpm)");
}

void McmcConfig::validate() const {
    if (burn_in <= 0 || draws <= 0) throw std::invalid_argument("burn_in and draws must be positive");
    if (thin <= 0 || thin > draws) throw std::invalid_argument("thin must lie in [1, draws]");
    if (!(0.0 < accept_low && accept_low < accept_high && accept_high < 1.0))
        throw std::invalid_argument("acceptance band must satisfy 0 < low < high < 1");
    if (adapt_window <= 0) throw std::invalid_argument("adaptation window must be positive");
    if (hyper) hyper->validate();
}

std::vector<ProposalBlock> default_blocks(const GarchParams& start, const Matrix& returns) {
    const Index k = start.assets();
    const Index c = start.correlation_size();
    const double n = static_cast<double>(returns.rows());
    std::vector<ProposalBlock> blocks;

    ProposalBlock mu{"mu", {}, Matrix::Zero(k, k), 1.0};
    const Matrix centered = returns.rowwise() - returns.colwise().mean();
    for (Index i = 0; i < k; ++i) {
        mu.indices.push_back(i);
        const double sd = std::sqrt(centered.col(i).squaredNorm() / std::max(1.0, n - 1.0));
        mu.shape(i, i) = sd / std::sqrt(std::max(1.0, n));
    }
    blocks.push_back(std::move(mu));

    for (Index i = 0; i < k; ++i) {
        ProposalBlock b{"garch_" + std::to_string(i + 1), {k + i, 2 * k + i, 3 * k + i, 4 * k + i}, Matrix::Zero(4, 4),
                        1.0};
        b.shape.diagonal() << std::max(0.1 * start.omega(i), 1e-4), 0.01, 0.01, 0.02;
        blocks.push_back(std::move(b));
    }

    ProposalBlock corr{"correlation", {}, Matrix::Zero(3 * c, 3 * c), 1.0};
    for (Index j = 0; j < 3 * c; ++j) {
        corr.indices.push_back(5 * k + j);
        corr.shape(j, j) = 0.01;
    }
    blocks.push_back(std::move(corr));
    return blocks;
}

LogTarget make_log_target(const Matrix& returns, Variant variant, std::vector<int> allocation,
                          std::vector<Matrix> precisions, FilterOptions opts) {
    const Index k = returns.cols();
    return [&returns, variant, k, allocation = std::move(allocation), precisions = std::move(precisions),
            opts = std::move(opts)](const Vector& flat) {
        const GarchParams p = GarchParams::unflatten(variant, k, flat);
        if (!validate_params(p).empty()) return -std::numeric_limits<double>::infinity();
        try {
            return log_likelihood(filter_volatilities(p, returns, opts), allocation, precisions);
        } catch (const NumericError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
}

double acceptance_probability(double current, double candidate) {
    if (!std::isfinite(candidate)) return 0.0;
    if (candidate >= current) return 1.0;
    return std::exp(candidate - current);
}

MhOutcome rwmh_step(const Vector& current, double current_log_target, const ProposalBlock& block,
                    const LogTarget& target, Rng& rng) {
    const auto d = static_cast<Index>(block.indices.size());
    const Vector z = rng.normal_vector(d);
    const Vector step = block.scale * Vector(block.shape.triangularView<Eigen::Lower>() * z);
    Vector candidate = current;
    for (Index j = 0; j < d; ++j) candidate(block.indices[static_cast<std::size_t>(j)]) += step(j);

    const double cand_target = target(candidate);
    MhOutcome out;
    out.outside_support = !std::isfinite(cand_target);
    const double accept = acceptance_probability(current_log_target, cand_target);
    // u is drawn on every step so that the stream position does not depend on the outcome.
    const double u = rng.uniform();
    if (u < accept) {
        out.params = std::move(candidate);
        out.log_target = cand_target;
        out.accepted = true;
    } else {
        out.params = current;
        out.log_target = current_log_target;
    }
    return out;
}

double adapt_scale(double acceptance, double scale, double low, double high, double up, double down, double floor) {
    if (acceptance > high) scale *= up;
    if (acceptance < low) scale *= down;
    return std::max(scale, floor);
}

namespace {

Matrix empirical_shape(const std::vector<Vector>& history, const std::vector<Index>& indices) {
    const auto d = static_cast<Index>(indices.size());
    const auto n = static_cast<Index>(history.size());
    Matrix x(n, d);
    for (Index r = 0; r < n; ++r)
        for (Index j = 0; j < d; ++j) x(r, j) = history[static_cast<std::size_t>(r)](indices[static_cast<std::size_t>(j)]);
    const Matrix centered = x.rowwise() - x.colwise().mean();
    Matrix cov = centered.transpose() * centered / static_cast<double>(std::max<Index>(n - 1, 1));
    const double ridge = 1e-8 * std::max(cov.diagonal().maxCoeff(), 1e-12);
    cov.diagonal().array() += ridge;
    auto llt = guarded_cholesky(cov);
    if (!llt) return Matrix();
    return llt->matrixL();
}

DpmSnapshot gaussian_snapshot(Index k) {
    DpmSnapshot s;
    s.concentration = 0.0;
    s.sticks = Vector::Ones(1);
    s.weights = Vector::Ones(1);
    s.precisions = {Matrix::Identity(k, k)};
    return s;
}

}  // namespace

PosteriorDraws run_mcmc(const McmcConfig& cfg, const Matrix& returns, int chain_index) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const Index k = returns.cols();
    const auto n = static_cast<std::size_t>(returns.rows());
    if (!returns.allFinite()) throw std::invalid_argument("returns contain non-finite values");
    if (returns.rows() < 2) throw std::invalid_argument("at least two observations are required");

    PosteriorDraws out;
    out.variant = cfg.variant;
    out.error_model = cfg.error_model;
    out.assets = k;
    out.observations = n;
    out.names = GarchParams::names(cfg.variant, k);
    out.hyper = cfg.hyper ? *cfg.hyper : DpmHyper::defaults(k);
    out.hyper.validate();
    out.seed = cfg.seed;

    // Starting point.
    if (cfg.start) {
        out.start = *cfg.start;
    } else {
        out.start = GarchParams::sampler_default(cfg.variant, returns.colwise().mean().transpose());
        if (cfg.ml_start) {
            const MlFit fit = fit_ml_gaussian(returns, cfg.variant);
            if (validate_params(fit.params).empty()) {
                out.start = fit.params;
                out.ml_start_used = true;
            }
        }
    }
    if (out.start.variant != cfg.variant || out.start.assets() != k)
        throw std::invalid_argument("start parameters do not match the variant or asset count");
    if (const auto v = validate_params(out.start); !v.empty())
        throw std::invalid_argument("start parameters violate constraints: " + describe(v));

    Rng rng = Rng::derive(cfg.seed, "chain", static_cast<std::uint64_t>(chain_index));

    FilterOptions fopts;
    VolatilityPath path = filter_volatilities(out.start, returns, fopts);
    if (!cfg.refresh_target) {
        fopts.target = path.target;
        path = filter_volatilities(out.start, returns, fopts);
    }

    const bool dpm = cfg.error_model == ErrorModel::dpm;
    DpmState state = initial_dpm_state(n, k);
    Vector x = out.start.flatten();
    double ll = log_likelihood(path, state.allocation, state.precisions);

    std::vector<ProposalBlock> blocks = default_blocks(out.start, returns);
    std::vector<BlockStats> burn(blocks.size()), kept(blocks.size());
    std::vector<long> window_accepted(blocks.size(), 0), window_proposed(blocks.size(), 0);
    for (std::size_t b = 0; b < blocks.size(); ++b) burn[b].name = kept[b].name = blocks[b].name;

    const int total = cfg.burn_in + cfg.draws;
    const int learn_at = cfg.burn_in / 2;
    const int learn_from = cfg.burn_in / 4;
    std::vector<Vector> history;

    const int retained = cfg.retained();
    out.params.resize(retained, x.size());
    out.log_likelihood.resize(retained);
    out.concentration.resize(retained);
    out.max_allocation.reserve(static_cast<std::size_t>(retained));
    out.occupied.reserve(static_cast<std::size_t>(retained));
    out.states.reserve(static_cast<std::size_t>(retained));
    out.next_covariance.reserve(static_cast<std::size_t>(retained));

    VolatilityPath candidate_path;
    long failures = 0;
    auto target = [&](const Vector& flat) {
        const GarchParams p = GarchParams::unflatten(cfg.variant, k, flat);
        if (!validate_params(p).empty()) return -std::numeric_limits<double>::infinity();
        try {
            candidate_path = filter_volatilities(p, returns, fopts);
            return log_likelihood(candidate_path, state.allocation, state.precisions);
        } catch (const NumericError&) {
            if (++failures > cfg.max_numeric_failures) {
                std::ostringstream os;
                os << "sampler aborted after " << failures << " numeric failures (last candidate: " << flat.transpose()
                   << ")";
                throw NumericError(os.str());
            }
            return -std::numeric_limits<double>::infinity();
        }
    };

    int stored = 0;
    for (int it = 0; it < total; ++it) {
        const bool in_burn = it < cfg.burn_in;
        if (dpm) {
            dpm_sweep(state, out.hyper, path.model_errors, rng);
            ll = log_likelihood(path, state.allocation, state.precisions);
        }
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            MhOutcome o = rwmh_step(x, ll, blocks[b], target, rng);
            BlockStats& st = in_burn ? burn[b] : kept[b];
            ++st.proposed;
            ++window_proposed[b];
            if (o.outside_support) ++st.constraint_rejections;
            if (o.accepted) {
                ++st.accepted;
                ++window_accepted[b];
                x = std::move(o.params);
                ll = o.log_target;
                std::swap(path, candidate_path);
            }
        }

        if (in_burn) {
            if (cfg.learn_covariance && it >= learn_from && it < learn_at) history.push_back(x);
            if (cfg.learn_covariance && it + 1 == learn_at && history.size() >= 50) {
                for (auto& blk : blocks) {
                    Matrix shape = empirical_shape(history, blk.indices);
                    if (shape.size() == 0) continue;
                    blk.shape = std::move(shape);
                    blk.scale = 2.38 / std::sqrt(static_cast<double>(blk.indices.size()));
                }
                history.clear();
            }
            if ((it + 1) % cfg.adapt_window == 0) {
                for (std::size_t b = 0; b < blocks.size(); ++b) {
                    const double acc = static_cast<double>(window_accepted[b]) / static_cast<double>(window_proposed[b]);
                    blocks[b].scale = adapt_scale(acc, blocks[b].scale, cfg.accept_low, cfg.accept_high, cfg.scale_up,
                                                  cfg.scale_down, cfg.scale_floor);
                    window_accepted[b] = window_proposed[b] = 0;
                }
            }
            continue;
        }

        const int post = it - cfg.burn_in;
        if ((post + 1) % cfg.thin != 0 || stored >= retained) continue;
        const GarchParams p = GarchParams::unflatten(cfg.variant, k, x);
        out.params.row(stored) = x.transpose();
        out.log_likelihood(stored) = ll;
        if (dpm) {
            out.concentration(stored) = state.concentration;
            out.max_allocation.push_back(state.max_allocation());
            out.occupied.push_back(state.occupied());
            out.states.push_back(snapshot(state));
        } else {
            out.concentration(stored) = 0.0;
            out.max_allocation.push_back(1);
            out.occupied.push_back(1);
            out.states.push_back(gaussian_snapshot(k));
        }
        out.next_covariance.push_back(next_step(p, path).h);
        ++stored;
    }

    for (std::size_t b = 0; b < blocks.size(); ++b) burn[b].final_scale = kept[b].final_scale = blocks[b].scale;
    out.burn_in_stats = std::move(burn);
    out.retained_stats = std::move(kept);
    out.numeric_failures = failures;
    for (const auto& st : out.retained_stats) {
        const double a = st.acceptance();
        if (a < cfg.accept_low || a > cfg.accept_high) {
            std::ostringstream os;
            os << "block " << st.name << " acceptance " << a << " outside [" << cfg.accept_low << ", " << cfg.accept_high
               << "]";
            out.warnings.push_back(os.str());
        }
    }
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

PosteriorDraws run_mcmc_chains(const McmcConfig& cfg, const Matrix& returns, int chains) {
    if (chains < 1) throw std::invalid_argument("at least one chain is required");
    if (chains == 1) return run_mcmc(cfg, returns, 0);

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<PosteriorDraws> results(static_cast<std::size_t>(chains));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chains));
    {
        std::vector<std::jthread> workers;
        for (int c = 0; c < chains; ++c) {
            workers.emplace_back([&, c] {
                try {
                    results[static_cast<std::size_t>(c)] = run_mcmc(cfg, returns, c);
                } catch (...) {
                    errors[static_cast<std::size_t>(c)] = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    PosteriorDraws merged = results.front();
    merged.chains = chains;
    for (std::size_t c = 1; c < results.size(); ++c) {
        const PosteriorDraws& r = results[c];
        const Index m0 = merged.params.rows();
        merged.params.conservativeResize(m0 + r.params.rows(), Eigen::NoChange);
        merged.params.bottomRows(r.params.rows()) = r.params;
        merged.log_likelihood.conservativeResize(m0 + r.size());
        merged.log_likelihood.tail(r.size()) = r.log_likelihood;
        merged.concentration.conservativeResize(m0 + r.size());
        merged.concentration.tail(r.size()) = r.concentration;
        merged.max_allocation.insert(merged.max_allocation.end(), r.max_allocation.begin(), r.max_allocation.end());
        merged.occupied.insert(merged.occupied.end(), r.occupied.begin(), r.occupied.end());
        merged.states.insert(merged.states.end(), r.states.begin(), r.states.end());
        merged.next_covariance.insert(merged.next_covariance.end(), r.next_covariance.begin(), r.next_covariance.end());
        for (std::size_t b = 0; b < merged.retained_stats.size(); ++b) {
            merged.retained_stats[b].proposed += r.retained_stats[b].proposed;
            merged.retained_stats[b].accepted += r.retained_stats[b].accepted;
            merged.retained_stats[b].constraint_rejections += r.retained_stats[b].constraint_rejections;
            merged.burn_in_stats[b].proposed += r.burn_in_stats[b].proposed;
            merged.burn_in_stats[b].accepted += r.burn_in_stats[b].accepted;
            merged.burn_in_stats[b].constraint_rejections += r.burn_in_stats[b].constraint_rejections;
        }
        merged.numeric_failures += r.numeric_failures;
        merged.warnings.insert(merged.warnings.end(), r.warnings.begin(), r.warnings.end());
    }
    merged.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return merged;
}

std::vector<ParameterSummary> summarize_draws(const PosteriorDraws& d) {
    if (d.size() < 2) throw std::invalid_argument("summaries need at least two draws");
    std::vector<ParameterSummary> out;
    for (Index j = 0; j < d.params.cols(); ++j) {
        const Vector col = d.params.col(j);
        out.push_back({d.names[static_cast<std::size_t>(j)], summarize(std::span<const double>(col.data(), col.size()))});
    }
    return out;
}

}  // namespace dpmgarch
