#include "dpmgarch/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace dpmgarch {

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& start,
                             const NelderMeadOptions& opts) {
    const Index n = start.size();
    const double dn = static_cast<double>(n);
    const double reflect = 1.0;
    const double expand = 1.0 + 2.0 / dn;
    const double contract = 0.75 - 1.0 / (2.0 * dn);
    const double shrink = 1.0 - 1.0 / dn;

    NelderMeadResult result;
    auto eval = [&](const Vector& x) {
        ++result.evaluations;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    std::vector<Vector> simplex(static_cast<std::size_t>(n + 1), start);
    std::vector<double> values(static_cast<std::size_t>(n + 1));
    values[0] = eval(start);
    for (Index i = 0; i < n; ++i) {
        Vector& v = simplex[static_cast<std::size_t>(i + 1)];
        v(i) += start(i) != 0.0 ? opts.initial_step * std::abs(start(i)) : opts.initial_step;
        values[static_cast<std::size_t>(i + 1)] = eval(v);
    }

    std::vector<std::size_t> order(simplex.size());
    while (result.evaluations < opts.max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[order.size() - 2];

        if (std::isfinite(values[worst]) &&
            std::abs(values[worst] - values[best]) <= opts.tolerance * (1.0 + std::abs(values[best]))) {
            result.converged = true;
            break;
        }

        Vector centroid = Vector::Zero(n);
        for (std::size_t i = 0; i < simplex.size(); ++i)
            if (i != worst) centroid += simplex[i];
        centroid /= dn;

        const Vector xr = centroid + reflect * (centroid - simplex[worst]);
        const double fr = eval(xr);
        if (fr < values[best]) {
            const Vector xe = centroid + expand * (xr - centroid);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        const bool outside = fr < values[worst];
        const Vector xc = outside ? Vector(centroid + contract * (xr - centroid))
                                  : Vector(centroid + contract * (simplex[worst] - centroid));
        const double fc = eval(xc);
        if (fc < std::min(fr, values[worst])) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i == best) continue;
            simplex[i] = simplex[best] + shrink * (simplex[i] - simplex[best]);
            values[i] = eval(simplex[i]);
        }
    }

    const auto it = std::min_element(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(it - values.begin());
    result.x = simplex[idx];
    result.value = *it;
    return result;
}

}  // namespace dpmgarch
