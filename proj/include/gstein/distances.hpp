#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gstein/gamma_dist.hpp"
#include "gstein/test_function.hpp"

namespace gstein {

struct DistanceEstimate {
    enum class Kind { exact, lower_bound, mc_estimate };
    double value = 0.0;
    Kind kind = Kind::exact;
    std::optional<double> stderr_;
};

// Exact d1 of the two empirical laws. Equal sample counts reduce to the mean
// absolute difference of the sorted samples; unequal counts integrate the CDF
// difference exactly.
DistanceEstimate wasserstein1(std::vector<double> a, std::vector<double> b);

// Lower bound on d2: max over the dictionary of |mean h(a) - E h(target)|.
// Every member must carry lip1 <= 1 and lip2 <= 1.
DistanceEstimate d2_dictionary_vs_centered_gamma(const std::vector<double>& samples,
                                                 const CenteredGammaParams& target,
                                                 const std::vector<TestFunction>& dict);
DistanceEstimate d2_dictionary_two_sample(const std::vector<double>& a,
                                          const std::vector<double>& b,
                                          const std::vector<TestFunction>& dict);

// E[h(Z_nu)] by quadrature (cached by callers where it matters).
double expected_on_centered_gamma(const TestFunction& h, const CenteredGammaParams& target);

// d1 <= (4/sqrt(pi)) sqrt(d2), valid when d2 <= 1.
double smoothing_bound(double d2_value);

// Gaussian mollification h * k_rho with k_rho(x) = rho*phi(rho*x), evaluated
// with a 61-point Gauss-Hermite rule; derivative bounds from the C_m chain.
TestFunction mollify(const TestFunction& h, double rho);

// C_m = ∫ |H_{m-1}| phi with monic Hermite H, m <= 8.
double cm_constant(int m);

// Kolmogorov statistic of samples against a target cdf.
DistanceEstimate kolmogorov(std::vector<double> samples,
                            const std::function<double(double)>& target_cdf);

// Monic (probabilists') Hermite polynomial H_m and its real roots.
double hermite_monic(int m, double x);
std::vector<double> hermite_roots(int m);

// Nodes and weights integrating exactly against the standard normal weight
// phi(x): sum w_i g(x_i) ≈ ∫ g phi, sum w_i = 1.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussHermiteRule gauss_hermite_phi(int n);

}  // namespace gstein
