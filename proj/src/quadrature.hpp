#pragma once

#include <functional>

#include "errors.hpp"

namespace hhinvex {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;   // conservative estimate of |value - true integral|
    int subdivisions = 0; // number of interval splits performed
    bool converged = true;
};

inline constexpr double kDefaultQuadTol = 1e-10;
inline constexpr int kDefaultMaxDepth = 50;

// Adaptive bisection with an embedded Gauss(7)/Kronrod(15) pair. The local
// error estimate is |K15 - G7|; an interval is accepted once its estimate
// fits its share of the tolerance. Non-convergence after max_depth is
// reported through the converged flag, never silently.
//
// Domain errors raised by the integrand propagate, annotated with the
// offending abscissa.
QuadratureResult integrate(const std::function<double(double)>& g, double lo, double hi,
                           double tol = kDefaultQuadTol, int max_depth = kDefaultMaxDepth);

}  // namespace hhinvex
