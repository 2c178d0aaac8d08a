#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpmgarch/data.hpp"
#include "dpmgarch/decisions.hpp"
#include "dpmgarch/dpm.hpp"
#include "dpmgarch/mgarch.hpp"
#include "dpmgarch/predictive.hpp"
#include "dpmgarch/sampler.hpp"
#include "dpmgarch/simulate.hpp"
#include "dpmgarch/summary.hpp"

namespace dpmgarch {

using Json = nlohmann::ordered_json;

/// Header plus numeric body of a comma-separated file.
struct NumericTable {
    std::vector<std::string> header;
    Matrix values;
    Index column(const std::string& name) const;  // -1 when absent
};
NumericTable read_numeric_table(const std::filesystem::path& path);
void write_numeric_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                         const Matrix& values);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

Json to_json(const Matrix& m);  // array of rows
Matrix matrix_from_json(const Json& j);
Json to_json(const Vector& v);
Vector vector_from_json(const Json& j);
Json to_json(const Summary& s);
Json to_json(const GarchParams& p);
GarchParams params_from_json(const Json& j);
Json to_json(const DpmHyper& h);
DpmHyper hyper_from_json(const Json& j);
Json to_json(const DpmSnapshot& s);
DpmSnapshot snapshot_from_json(const Json& j);
Json to_json(const StatsTable& t);
Json to_json(const ErrorSpec& s);
Json to_json(const FilterOptions& o);
FilterOptions filter_options_from_json(const Json& j);

/// Flattened K x K headers prefix_i_j (1-based, row-major).
std::vector<std::string> matrix_headers(const std::string& prefix, Index k);

/// File names inside a run directory.
namespace files {
inline constexpr const char* draws = "draws.csv";
inline constexpr const char* states = "dpm_states.jsonl";
inline constexpr const char* manifest = "manifest.json";
inline constexpr const char* predictive_cov = "predictive_cov.csv";
inline constexpr const char* predictive_returns = "predictive_returns.csv";
inline constexpr const char* predictive_summary = "predictive_summary.json";
inline constexpr const char* density = "predictive_density.csv";
inline constexpr const char* allocation = "allocation.json";
inline constexpr const char* allocation_draws = "allocation_draws.csv";
inline constexpr const char* hedge = "hedge.json";
inline constexpr const char* hedge_draws = "hedge_draws.csv";
}  // namespace files

/// draws.csv: iter, chain, loglik, concentration, zstar, occupied, the
/// parameter columns, then h_next_i_j. dpm_states.jsonl: one snapshot per row.
void write_draws(const PosteriorDraws& d, const std::filesystem::path& dir);

/// Estimation manifest: configuration, seed, acceptance rates, cluster trace.
Json estimate_manifest(const PosteriorDraws& d, const McmcConfig& cfg);

/// Inverse of write_draws plus the manifest. Throws DataError on schema mismatch.
PosteriorDraws read_draws(const std::filesystem::path& dir);

/// predictive_cov.csv: draw, fresh, mu_i, hstar_i_j, h_i_j, lambda_i_j.
/// predictive_returns.csv: draw, r_i, e_i.
void write_predictive(const PredictiveDraws& pd, const std::filesystem::path& dir);
PredictiveDraws read_predictive(const std::filesystem::path& dir);

/// Per-entry summaries of H* (upper triangle), error kurtosis and sizes.
Json predictive_summary(const PredictiveDraws& pd);

Json decision_summary(const DecisionDraws& d, const std::vector<std::string>& labels);
void write_decision_draws(const DecisionDraws& d, const std::filesystem::path& path);

void write_density(const DensityTable& table, const std::filesystem::path& path);

/// H_t path: t, h_i_j for every observation.
void write_path(const VolatilityPath& path, const std::filesystem::path& file);
std::vector<Matrix> read_path(const std::filesystem::path& file);

}  // namespace dpmgarch
