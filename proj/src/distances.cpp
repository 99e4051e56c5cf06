#include "gstein/distances.hpp"

#include <algorithm>
#include <cmath>

#include "gstein/errors.hpp"
#include "gstein/parallel.hpp"
#include "gstein/quadrature.hpp"
#include "gstein/stein_core.hpp"

namespace gstein {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310005024157652848110;

double normal_phi(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

// Orthonormal Hermite values p_0..p_{n} at x (normalized against phi).
void orthonormal_hermite(int n, double x, std::vector<double>& out) {
    out.resize(n + 1);
    out[0] = 1.0;
    if (n >= 1) out[1] = x;
    for (int k = 1; k < n; ++k)
        out[k + 1] = (x * out[k] - std::sqrt(static_cast<double>(k)) * out[k - 1]) /
                     std::sqrt(static_cast<double>(k + 1));
}

double orthonormal_hermite_top(int n, double x) {
    std::vector<double> v;
    orthonormal_hermite(n, x, v);
    return v[n];
}

}  // namespace

double hermite_monic(int m, double x) {
    double hm1 = 0.0, h = 1.0;
    for (int k = 0; k < m; ++k) {
        double next = x * h - k * hm1;
        hm1 = h;
        h = next;
    }
    return h;
}

std::vector<double> hermite_roots(int m) {
    if (m < 0) throw contract_error("hermite_roots: negative degree");
    std::vector<double> roots;
    if (m == 0) return roots;
    // Build up by interlacing: roots of H_k separate those of H_{k+1}.
    roots = {0.0};
    for (int k = 2; k <= m; ++k) {
        const double outer = std::sqrt(4.0 * k + 2.0);
        std::vector<double> brackets;
        brackets.push_back(-outer);
        for (double r : roots) brackets.push_back(r);
        brackets.push_back(outer);
        std::vector<double> next;
        for (std::size_t i = 0; i + 1 < brackets.size(); ++i) {
            double lo = brackets[i], hi = brackets[i + 1];
            double flo = orthonormal_hermite_top(k, lo);
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                double fm = orthonormal_hermite_top(k, mid);
                if ((flo <= 0.0) == (fm <= 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if (hi - lo < 1e-15 * std::max(1.0, std::abs(lo))) break;
            }
            next.push_back(0.5 * (lo + hi));
        }
        roots = std::move(next);
    }
    return roots;
}

GaussHermiteRule gauss_hermite_phi(int n) {
    if (n < 1) throw contract_error("gauss_hermite_phi: n must be >= 1");
    GaussHermiteRule rule;
    rule.nodes = hermite_roots(n);
    rule.weights.resize(n);
    std::vector<double> p;
    for (int i = 0; i < n; ++i) {
        orthonormal_hermite(n - 1, rule.nodes[i], p);
        KahanSum s;
        for (int k = 0; k < n; ++k) s.add(p[k] * p[k]);
        rule.weights[i] = 1.0 / s.value();
    }
    return rule;
}

DistanceEstimate wasserstein1(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw contract_error("wasserstein1: empty input");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    DistanceEstimate out;
    out.kind = DistanceEstimate::Kind::exact;
    if (a.size() == b.size()) {
        KahanSum acc;
        for (std::size_t i = 0; i < a.size(); ++i) acc.add(std::abs(a[i] - b[i]));
        out.value = acc.value() / a.size();
        return out;
    }
    // ∫ |F_a - F_b| over the merged support.
    KahanSum acc;
    std::size_t i = 0, j = 0;
    double prev = std::min(a[0], b[0]);
    while (i < a.size() || j < b.size()) {
        double next;
        if (j >= b.size() || (i < a.size() && a[i] <= b[j]))
            next = a[i];
        else
            next = b[j];
        const double fa = static_cast<double>(i) / a.size();
        const double fb = static_cast<double>(j) / b.size();
        acc.add(std::abs(fa - fb) * (next - prev));
        prev = next;
        while (i < a.size() && a[i] == next) ++i;
        while (j < b.size() && b[j] == next) ++j;
    }
    out.value = acc.value();
    return out;
}

double expected_on_centered_gamma(const TestFunction& h, const CenteredGammaParams& target) {
    return expected_h_centered(h, target);
}

namespace {

void require_h2_member(const TestFunction& h) {
    if (!h.lip1 || *h.lip1 > 1.0 + 1e-12 || !h.lip2 || *h.lip2 > 1.0 + 1e-12)
        throw contract_error("d2 dictionary member violates the lip1, lip2 <= 1 certification: " +
                             h.name);
}

double sample_mean(const std::vector<double>& xs, const TestFunction& h) {
    return parallel_sum(xs.size(), 65536, [&](std::size_t i) { return h.eval(xs[i]); }) /
           static_cast<double>(xs.size());
}

}  // namespace

DistanceEstimate d2_dictionary_vs_centered_gamma(const std::vector<double>& samples,
                                                 const CenteredGammaParams& target,
                                                 const std::vector<TestFunction>& dict) {
    if (samples.empty() || dict.empty()) throw contract_error("d2_dictionary: empty input");
    DistanceEstimate out;
    out.kind = DistanceEstimate::Kind::lower_bound;
    for (const TestFunction& h : dict) {
        require_h2_member(h);
        const double diff =
            std::abs(sample_mean(samples, h) - expected_on_centered_gamma(h, target));
        out.value = std::max(out.value, diff);
    }
    return out;
}

DistanceEstimate d2_dictionary_two_sample(const std::vector<double>& a,
                                          const std::vector<double>& b,
                                          const std::vector<TestFunction>& dict) {
    if (a.empty() || b.empty() || dict.empty()) throw contract_error("d2_dictionary: empty input");
    DistanceEstimate out;
    out.kind = DistanceEstimate::Kind::lower_bound;
    for (const TestFunction& h : dict) {
        require_h2_member(h);
        out.value = std::max(out.value, std::abs(sample_mean(a, h) - sample_mean(b, h)));
    }
    return out;
}

double smoothing_bound(double d2_value) {
    if (!(d2_value >= 0.0) || d2_value > 1.0)
        throw contract_error("smoothing_bound: requires 0 <= d2 <= 1");
    return 4.0 / std::sqrt(M_PI) * std::sqrt(d2_value);
}

TestFunction mollify(const TestFunction& h, double rho) {
    if (!(rho > 0.0)) throw contract_error("mollify: rho must be > 0");
    if (!h.lip1) throw contract_error("mollify: h must declare lip1");
    const GaussHermiteRule rule = gauss_hermite_phi(61);
    auto base = h.eval;
    const std::vector<double> kinks = h.kinks;

    // ∫ g(u) phi(u) du with segments split where h(x - u/rho) loses
    // smoothness; the 61-point rule handles kink-free members.
    auto convolve = [base, rule, rho, kinks](double x, bool weight_u) {
        if (kinks.empty()) {
            KahanSum s;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double u = rule.nodes[i];
                s.add(rule.weights[i] * (weight_u ? u : 1.0) * base(x - u / rho));
            }
            return s.value();
        }
        std::vector<double> cuts = {-14.0, 14.0};
        for (double k : kinks) {
            const double u = rho * (x - k);
            if (u > -14.0 && u < 14.0) cuts.push_back(u);
        }
        std::sort(cuts.begin(), cuts.end());
        KahanSum s;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            s.add(integrate_checked(
                [&](double u) {
                    return (weight_u ? u : 1.0) * normal_phi(u) * base(x - u / rho);
                },
                cuts[i], cuts[i + 1], 2e-12));
        }
        return s.value();
    };

    TestFunction out;
    out.name = "mollified(" + h.name + ", rho=" + std::to_string(rho) + ")";
    out.eval = [convolve](double x) { return convolve(x, false); };
    // h * k_rho' = -rho ∫ u phi(u) h(x - u/rho) du: only the continuous h is
    // sampled, so the evaluation stays smooth in x even when h' jumps.
    out.d1 = [convolve, rho](double x) { return -rho * convolve(x, true); };
    out.lip1 = *h.lip1;  // C_1 = 1
    const double moll2 = cm_constant(2) * rho * *h.lip1;
    out.lip2 = h.lip2 ? std::min(*h.lip2, moll2) : moll2;
    return out;
}

double cm_constant(int m) {
    if (m < 1 || m > 8) throw contract_error("cm_constant: m must be in [1, 8]");
    if (m == 1) return 1.0;
    // Between consecutive roots of H_{m-1} the sign is constant and
    // (H_{m-2} phi)' = -H_{m-1} phi, so each piece integrates in closed form.
    const std::vector<double> roots = hermite_roots(m - 1);
    auto anti = [&](double x) { return -hermite_monic(m - 2, x) * normal_phi(x); };
    KahanSum total;
    double prev_val = 0.0;  // antiderivative at -inf
    for (double r : roots) {
        total.add(std::abs(anti(r) - prev_val));
        prev_val = anti(r);
    }
    total.add(std::abs(0.0 - prev_val));  // tail to +inf
    return total.value();
}

DistanceEstimate kolmogorov(std::vector<double> samples,
                            const std::function<double(double)>& target_cdf) {
    if (samples.empty()) throw contract_error("kolmogorov: empty input");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double c = target_cdf(samples[i]);
        sup = std::max(sup, std::abs((i + 1) / n - c));
        sup = std::max(sup, std::abs(i / n - c));
    }
    DistanceEstimate out;
    out.value = sup;
    out.kind = DistanceEstimate::Kind::exact;
    return out;
}

}  // namespace gstein
