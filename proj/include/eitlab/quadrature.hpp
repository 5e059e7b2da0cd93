#pragma once

#include <functional>
#include <stdexcept>

#include "eitlab/units.hpp"

namespace eitlab {

struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adaptive Gauss-Kronrod (G7/K15) integration of a complex-valued integrand
// over [a, b]. Subdivides the worst interval until the summed error estimate
// meets rel_tol * |result| (or abs_tol). Throws numerical_error with interval
// diagnostics when the subdivision budget is exhausted.
cplx integrate_gk(const std::function<cplx(double)>& f, double a, double b,
                  double rel_tol = 1e-10, double abs_tol = 0.0,
                  int max_intervals = 4096);

} // namespace eitlab
