#pragma once

#include <complex>
#include <functional>

namespace tds {

struct QuadratureResult {
    std::complex<double> value;
    double error_estimate = 0.0;
    int evaluations = 0;
};

// Globally adaptive Gauss-Kronrod (7/15) on [a, b]; bisects the interval with
// the largest error until the total estimate meets max(abs_tol, rel_tol |I|).
QuadratureResult integrate(const std::function<std::complex<double>(double)>& f, double a, double b,
                           double abs_tol = 1e-14, double rel_tol = 1e-12, int max_intervals = 2000);

}  // namespace tds
