#include "dpmgarch/summary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpmgarch {

double quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("summary of an empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    Summary s;
    s.count = sorted.size();
    double total = 0.0;
    for (double v : sorted) total += v;
    s.mean = total / static_cast<double>(s.count);
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.sd = s.count > 1 ? std::sqrt(ss / static_cast<double>(s.count - 1)) : 0.0;
    s.median = quantile(sorted, 0.5);
    s.lower = quantile(sorted, 0.025);
    s.upper = quantile(sorted, 0.975);
    s.min = sorted.front();
    s.max = sorted.back();
    // Rounding in the running sum can push a constant chain's mean off its value.
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

double sample_kurtosis(std::span<const double> values) {
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = (v - mean) * (v - mean);
        m2 += d;
        m4 += d * d;
    }
    m2 /= n;
    m4 /= n;
    return m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
}

}  // namespace dpmgarch
