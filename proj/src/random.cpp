#include "dpmgarch/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dpmgarch {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t Rng::derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index) {
    return splitmix64(splitmix64(root) ^ splitmix64(fnv1a(tag)) ^ splitmix64(index + 0x5851f42d4c957f2dULL));
}

double Rng::uniform() {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    double u = dist(engine_);
    while (u <= 0.0) u = dist(engine_);
    return u;
}

Vector Rng::normal_vector(Index n) {
    Vector z(n);
    for (Index i = 0; i < n; ++i) z(i) = normal();
    return z;
}

double Rng::gamma(double shape, double rate) {
    std::gamma_distribution<double> dist(shape, 1.0 / rate);
    return dist(engine_);
}

double Rng::beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    const double s = x + y;
    if (s <= 0.0) {
        // Both shapes tiny and both draws underflowed; fall back on the mean.
        return a / (a + b);
    }
    return x / s;
}

Matrix Rng::wishart(double dof, const Matrix& scale) {
    const Index k = scale.rows();
    const Matrix chol = lower_sqrt(scale, "Wishart scale");
    Matrix a = Matrix::Zero(k, k);
    for (Index i = 0; i < k; ++i) {
        a(i, i) = std::sqrt(chi_squared(dof - static_cast<double>(i)));
        for (Index j = 0; j < i; ++j) a(i, j) = normal();
    }
    const Matrix la = chol * a;
    Matrix w = la * la.transpose();
    symmetrize(w);
    return w;
}

}  // namespace dpmgarch
