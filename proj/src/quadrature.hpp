#pragma once

#include <cstddef>
#include <functional>

namespace maxq {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    unsigned max_levels = 60;
    std::size_t max_evaluations = 4'000'000;
};

/// Adaptive Gauss-Kronrod (7/15) integral of f over [lo, hi]. Throws
/// NumericFailure, with the error estimate in the message, when the estimate
/// exceeds abs_tol after max_levels bisections or the evaluation budget runs out.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 QuadratureOptions options = {});

}  // namespace maxq
