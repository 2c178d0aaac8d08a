#pragma once

#include <span>
#include <vector>

namespace dpmgarch {

struct Summary {
    double mean = 0.0;
    double sd = 0.0;  // n-1 denominator
    double median = 0.0;
    double lower = 0.0;  // 2.5% quantile
    double upper = 0.0;  // 97.5% quantile
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

/// Quantile by linear interpolation between order statistics at (n-1)p.
double quantile(std::span<const double> sorted, double p);

Summary summarize(std::span<const double> values);

double sample_kurtosis(std::span<const double> values);

}  // namespace dpmgarch
