#pragma once

#include <functional>

#include "dpmgarch/linalg.hpp"

namespace dpmgarch {

struct NelderMeadOptions {
    int max_evaluations = 20000;
    double tolerance = 1e-10;  // on the spread of simplex values
    double initial_step = 0.1;
};

struct NelderMeadResult {
    Vector x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Minimize `f` with the adaptive-coefficient Nelder-Mead simplex. `f` may
/// return +inf to mark infeasible points. The returned value never exceeds
/// f(start).
NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& start,
                             const NelderMeadOptions& opts = {});

}  // namespace dpmgarch
