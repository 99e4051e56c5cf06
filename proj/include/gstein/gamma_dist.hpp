#pragma once

#include <cstdint>
#include <vector>

namespace gstein {

// Gamma(r, lambda): shape r, rate lambda.
struct GammaParams {
    double r;
    double lambda;
    GammaParams(double shape, double rate);
};

// Centered Gamma with parameter nu: the law of 2*X - nu, X ~ Gamma(nu/2, 1).
struct CenteredGammaParams {
    double nu;
    explicit CenteredGammaParams(double nu_);
};

// Regularized lower incomplete gamma P(a, x); series for x < a+1, continued
// fraction otherwise. Absolute tolerance 1e-14.
double regularized_gamma_p(double a, double x);

double gamma_pdf(double x, const GammaParams& p);
double gamma_cdf(double x, const GammaParams& p);

double centered_gamma_pdf(double x, const CenteredGammaParams& p);
double centered_gamma_cdf(double x, const CenteredGammaParams& p);

// Exact k-th moment of the centered Gamma law, k <= 12, by binomial expansion
// over the raw Gamma moments Gamma(nu/2 + j) / Gamma(nu/2).
double centered_gamma_moment(double nu, int k);

// Deterministic given (nu, n, seed).
std::vector<double> sample_centered_gamma(double nu, std::size_t n, std::uint64_t seed);

// Gamma(r, lambda) samples, deterministic given seed; used by the scaling-law
// checks and the distance estimators.
std::vector<double> sample_gamma(const GammaParams& p, std::size_t n, std::uint64_t seed);

}  // namespace gstein
