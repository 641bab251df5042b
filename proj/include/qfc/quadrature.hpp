#pragma once

#include <functional>

namespace qfc {

// Adaptive 15-point Gauss-Kronrod on [a, b] (finite or infinite limits).
double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-12);

// Integral over [a, b] within [-1, 1] after z = tanh(u), for integrands
// with steep essential-singularity behaviour at z = +-1. `f` receives z and
// 1 - z^2 (computed as sech^2 u, without cancellation).
double integrate_tanh(const std::function<double(double z, double one_minus_z2)>& f, double a, double b,
                      double rel_tol = 1e-12);

}  // namespace qfc
