#pragma once

#include <functional>

namespace gstein {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;   // accumulated error estimate
    long evaluations = 0;
    bool converged = false;
};

using ScalarFn = std::function<double(double)>;

// Adaptive Gauss-Kronrod (G7,K15) on [a,b] to absolute tolerance abs_tol.
QuadResult integrate(const ScalarFn& f, double a, double b, double abs_tol,
                     int max_intervals = 4000);

// As integrate(), but throws accuracy_error when the tolerance is not met.
double integrate_checked(const ScalarFn& f, double a, double b, double abs_tol,
                         int max_intervals = 4000);

// ∫_0^y s^{r-1} ψ(s) ds for r > 0 with ψ smooth. The endpoint singularity at
// s = 0 (r < 1) is removed exactly by the substitution v = s^r.
double integrate_power_weight(double r, double y, const ScalarFn& psi, double abs_tol);

// ∫_0^∞ g(u) e^{-u} du where g has at most polynomial growth. The weight is
// part of the integrand handed in by the caller; truncation at u = 70 leaves
// mass below e^-70 ~ 4e-31 relative to the weight.
double integrate_expdamped(const ScalarFn& g_times_weight, double abs_tol);

}  // namespace gstein
