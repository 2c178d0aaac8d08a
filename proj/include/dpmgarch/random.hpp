#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "dpmgarch/linalg.hpp"

namespace dpmgarch {

/// 64-bit Mersenne Twister stream with the distributions the samplers need.
///
/// Substreams are derived deterministically from a root seed, a module tag and
/// an index (`Rng::derive`), so that per-chain and per-draw streams are
/// independent of scheduling order.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 1) : engine_(seed) {}

    static std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index);
    static Rng derive(std::uint64_t root, std::string_view tag, std::uint64_t index = 0) {
        return Rng(derive_seed(root, tag, index));
    }

    std::mt19937_64& engine() { return engine_; }

    /// Uniform on the open interval (0, 1).
    double uniform();
    double normal() { return std_normal_(engine_); }
    Vector normal_vector(Index n);
    /// Gamma with shape `shape` and rate `rate` (mean shape/rate).
    double gamma(double shape, double rate);
    double beta(double a, double b);
    double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof, 1.0); }

    /// Wishart draw with `dof` classical degrees of freedom (dof > K-1) and
    /// scale matrix `scale`; mean dof * scale. Bartlett decomposition.
    Matrix wishart(double dof, const Matrix& scale);

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> std_normal_{0.0, 1.0};
};

}  // namespace dpmgarch
