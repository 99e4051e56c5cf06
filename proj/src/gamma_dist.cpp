#include "gstein/gamma_dist.hpp"

#include <cmath>
#include <limits>

#include "gstein/errors.hpp"
#include "gstein/parallel.hpp"
#include "gstein/rng.hpp"

namespace gstein {

namespace {

constexpr double kIncGammaTol = 1e-14;

void require_finite(double x, const char* where) {
    if (!std::isfinite(x)) throw contract_error(std::string(where) + ": non-finite argument");
}

// Lower regularized gamma by its power series, valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kIncGammaTol)
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw accuracy_error("incomplete gamma series did not converge", std::abs(term));
}

// Upper regularized gamma by the Lentz continued fraction, for x >= a + 1.
double gamma_q_contfrac(double a, double x) {
    const double tiny = std::numeric_limits<double>::min() / kIncGammaTol;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kIncGammaTol)
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw accuracy_error("incomplete gamma continued fraction did not converge", 0.0);
}

}  // namespace

GammaParams::GammaParams(double shape, double rate) : r(shape), lambda(rate) {
    if (!(shape > 0.0) || !std::isfinite(shape)) throw contract_error("GammaParams: r must be > 0");
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw contract_error("GammaParams: lambda must be > 0");
}

CenteredGammaParams::CenteredGammaParams(double nu_) : nu(nu_) {
    if (!(nu_ > 0.0) || !std::isfinite(nu_))
        throw contract_error("CenteredGammaParams: nu must be > 0");
}

double regularized_gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_contfrac(a, x);
}

double gamma_pdf(double x, const GammaParams& p) {
    require_finite(x, "gamma_pdf");
    if (x <= 0.0) return 0.0;
    return std::exp(p.r * std::log(p.lambda) + (p.r - 1.0) * std::log(x) - p.lambda * x -
                    std::lgamma(p.r));
}

double gamma_cdf(double x, const GammaParams& p) {
    require_finite(x, "gamma_cdf");
    if (x <= 0.0) return 0.0;
    return regularized_gamma_p(p.r, p.lambda * x);
}

double centered_gamma_pdf(double x, const CenteredGammaParams& p) {
    // Z = 2X - nu, X ~ Gamma(nu/2, 1); density transforms with factor 1/2.
    return 0.5 * gamma_pdf(0.5 * (x + p.nu), GammaParams(0.5 * p.nu, 1.0));
}

double centered_gamma_cdf(double x, const CenteredGammaParams& p) {
    return gamma_cdf(0.5 * (x + p.nu), GammaParams(0.5 * p.nu, 1.0));
}

double centered_gamma_moment(double nu, int k) {
    if (!(nu > 0.0)) throw contract_error("centered_gamma_moment: nu must be > 0");
    if (k < 0 || k > 12) throw contract_error("centered_gamma_moment: k must be in [0, 12]");
    // E[(2X - nu)^k] with raw moments E[X^j] = prod_{i<j} (nu/2 + i).
    const double a = 0.5 * nu;
    double raw[13];
    raw[0] = 1.0;
    for (int j = 1; j <= k; ++j) raw[j] = raw[j - 1] * (a + (j - 1));
    KahanSum sum;
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
        const double sign_pow = std::pow(-nu, k - j) * std::pow(2.0, j);
        sum.add(binom * sign_pow * raw[j]);
        binom = binom * (k - j) / (j + 1.0);
    }
    return sum.value();
}

std::vector<double> sample_centered_gamma(double nu, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw contract_error("sample_centered_gamma: n must be >= 1");
    CenteredGammaParams check(nu);
    std::vector<double> out(n);
    const double shape = 0.5 * nu;
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(seed, i);
        out[i] = 2.0 * rng.gamma(shape) - nu;
    }
    return out;
}

std::vector<double> sample_gamma(const GammaParams& p, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw contract_error("sample_gamma: n must be >= 1");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(seed, i);
        out[i] = rng.gamma(p.r) / p.lambda;
    }
    return out;
}

}  // namespace gstein
