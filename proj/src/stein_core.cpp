#include "gstein/stein_core.hpp"

#include <algorithm>
#include <cmath>

#include "gstein/errors.hpp"
#include "gstein/parallel.hpp"
#include "gstein/quadrature.hpp"

namespace gstein {

namespace {

using Fn = std::function<double(double)>;

double probe_lipschitz(const Fn& h) {
    double lip = 0.0;
    for (double x = -64.0; x <= 64.0; x += 0.5)
        lip = std::max(lip, std::abs(h(x + 5e-4) - h(x - 5e-4)) / 1e-3);
    return lip;
}

// E[g(Y)] for Y ~ Gamma(r, 1): power-weighted head on [0,1], adaptive body
// split at the points where g loses smoothness, tail truncated where the
// Lipschitz envelope bound falls under 1% of the tolerance.
double gamma_expectation(double r, const Fn& g, double g_lip, double abs_tol,
                         const std::vector<double>& cuts_hint = {}) {
    double T = std::max(4.0 * r + 24.0, 36.0);
    for (;;) {
        const double q = 1.0 - regularized_gamma_p(r, T);
        const double mean_excess = r * (1.0 - regularized_gamma_p(r + 1.0, T)) - T * q;
        const double tail_bound = std::abs(g(T)) * q + g_lip * std::abs(mean_excess);
        if (tail_bound < 0.01 * abs_tol || T > 700.0) break;
        T *= 1.4;
    }
    const double lg = std::lgamma(r);
    auto weighted = [&](double t) { return g(t) * std::exp(-t - lg); };
    std::vector<double> cuts = {std::min(1.0, T), T};
    for (double k : cuts_hint)
        if (k > 1e-10 && k < T) cuts.push_back(k);
    std::sort(cuts.begin(), cuts.end());
    KahanSum total;
    total.add(integrate_power_weight(r, cuts.front(), weighted, 0.45 * abs_tol));
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        total.add(integrate_checked(
            [&](double t) { return g(t) * std::exp((r - 1.0) * std::log(t) - t - lg); },
            cuts[i], cuts[i + 1], 0.45 * abs_tol / cuts.size()));
    }
    return total.value();
}

// lambda = 1 core: target Gamma(r, 1), test function h1 with E[h1(X_r)] = eh.
// Head form on (0, r+1]:   f(y) = ∫_0^1 (h1(yτ) - eh) τ^{r-1} e^{y(1-τ)} dτ
// Tail form on (r+1, ∞):   f(y) = -(1/y) ∫_0^∞ (h1(y+u) - eh) (1+u/y)^{r-1} e^{-u} du
// Negative axis:           f(y) = ∫_0^1 (h1(yτ) - eh) τ^{r-1} e^{y(1-τ)} dτ  (y < 0)
// (the negative-axis weight q_l reduces to the same scaled kernel after the
// substitution s = -yτ; e^{y(1-τ)} ≤ 1 keeps it stable).
struct CoreSolution {
    double r;
    Fn h1;
    Fn h1d;  // derivative of h1
    double eh;
    double quad_tol;
    std::vector<double> kinks;  // of h1, in core coordinates

    // ∫_0^1 t^{r-1} g(t) dt with the integral split wherever h1(y t) loses
    // smoothness; corners inside a panel defeat the Gauss-Kronrod error
    // estimate, so they become segment boundaries instead.
    double integrate_unit(double y, const Fn& g) const {
        std::vector<double> cuts;
        for (double k : kinks) {
            const double t = k / y;
            if (t > 1e-12 && t < 1.0 - 1e-12) cuts.push_back(t);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.push_back(1.0);
        double first = cuts.front();
        KahanSum total;
        total.add(integrate_power_weight(r, first, g, quad_tol));
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            total.add(integrate_checked(
                [&](double t) { return std::pow(t, r - 1.0) * g(t); }, cuts[i], cuts[i + 1],
                quad_tol));
        }
        return total.value();
    }

    // ∫_0^70 g(u) du for exponentially damped g, split at the mapped kinks
    // u = k - y and at u = 8 (fast-varying head).
    double integrate_damped(double y, const Fn& g) const {
        std::vector<double> cuts = {0.0, 8.0, 70.0};
        for (double k : kinks) {
            const double u = k - y;
            if (u > 1e-10 && u < 70.0 - 1e-10) cuts.push_back(u);
        }
        std::sort(cuts.begin(), cuts.end());
        KahanSum total;
        const double tol = quad_tol * std::max(1.0, 0.05 * y);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            total.add(integrate_checked(g, cuts[i], cuts[i + 1], tol));
        return total.value();
    }

    double head_or_neg(double y) const {
        return integrate_unit(
            y, [&](double t) { return (h1(y * t) - eh) * std::exp(y * (1.0 - t)); });
    }

    double tail(double y) const {
        return -integrate_damped(y,
                                 [&](double u) {
                                     return (h1(y + u) - eh) * std::pow(1.0 + u / y, r - 1.0) *
                                            std::exp(-u);
                                 }) /
               y;
    }

    double value_at_zero() const { return (h1(0.0) - eh) / r; }

    double f(double y) const {
        if (y == 0.0) return value_at_zero();
        if (y > r + 1.0) return tail(y);
        return head_or_neg(y);
    }

    // d/dy of the head / negative-axis form, differentiating under the
    // integral sign.
    double fprime_head_or_neg(double y) const {
        return integrate_unit(y, [&](double t) {
            return (h1d(y * t) * t + (h1(y * t) - eh) * (1.0 - t)) * std::exp(y * (1.0 - t));
        });
    }

    double fprime_tail(double y) const {
        const double fy = tail(y);
        const double iprime = integrate_damped(y, [&](double u) {
            const double w = std::pow(1.0 + u / y, r - 1.0);
            const double wprime = (r - 1.0) * std::pow(1.0 + u / y, r - 2.0) * (-u / (y * y));
            return (h1d(y + u) * w + (h1(y + u) - eh) * wprime) * std::exp(-u);
        });
        // f = -(1/y) I  =>  f' = -f/y - I'/y.
        return -fy / y - iprime / y;
    }

    double fprime_integral(double y) const {
        if (y > r + 1.0) return fprime_tail(y);
        return fprime_head_or_neg(y);
    }

    // Closed form at 0 (continuous extension of f').
    double fprime_at_zero() const {
        return h1d(0.0) / (r + 1.0) + (h1(0.0) - eh) / (r * (r + 1.0));
    }
};

bool has_kink_at(const TestFunction& h, double x) {
    for (double k : h.kinks)
        if (std::abs(k - x) < 1e-12) return true;
    return false;
}

}  // namespace

struct SteinSolution::Impl {
    explicit Impl(SteinTarget t) : target(std::move(t)) {}

    SteinTarget target;
    TestFunction h;
    double eh = 0.0;
    CoreSolution core;   // lambda = 1 core in the scaled variable
    double band = 1e-6;  // half-width of the closed-form band, in core units
    bool kink_at_singular = false;

    bool centered() const { return std::holds_alternative<CenteredGammaParams>(target); }

    // Map x to the core variable y.
    double to_core(double x) const {
        if (centered()) return 0.5 * (x + std::get<CenteredGammaParams>(target).nu);
        return std::get<GammaParams>(target).lambda * x;
    }
    // Scale of f and f' relative to the core solution g: f(x) = out_scale *
    // g(to_core(x)); f'(x) = deriv_scale * g'(to_core(x)).
    double out_scale() const { return centered() ? 0.5 : 1.0; }
    double deriv_scale() const {
        if (centered()) return 0.25;
        return std::get<GammaParams>(target).lambda;
    }

    double f(double x) const {
        const double y = to_core(x);
        if (std::abs(y) <= band) {
            const double fp0 = kink_at_singular ? 0.0 : core.fprime_at_zero();
            return out_scale() * (core.value_at_zero() + y * fp0);
        }
        return out_scale() * core.f(y);
    }

    double fprime(double x) const {
        const double y = to_core(x);
        if (std::abs(y) <= band) {
            if (kink_at_singular) return 0.0;
            return deriv_scale() * core.fprime_at_zero();
        }
        // Rearranged defining equation.
        if (centered()) {
            const double nu = std::get<CenteredGammaParams>(target).nu;
            return (h.eval(x) - eh + x * f(x)) / (2.0 * (x + nu));
        }
        const GammaParams& p = std::get<GammaParams>(target);
        return (h.eval(x) - eh - (p.r - p.lambda * x) * f(x)) / x;
    }

    double fprime_integral(double x) const {
        const double y = to_core(x);
        if (std::abs(y) <= band) {
            if (kink_at_singular) return 0.0;
            return deriv_scale() * core.fprime_at_zero();
        }
        return deriv_scale() * core.fprime_integral(y);
    }
};

double expected_h(const TestFunction& h, const GammaParams& p, double abs_tol) {
    double lip = h.lip1 ? *h.lip1 : probe_lipschitz(h.eval);
    auto g = [&](double t) { return h.eval(t / p.lambda); };
    std::vector<double> cuts;
    for (double k : h.kinks) cuts.push_back(p.lambda * k);
    return gamma_expectation(p.r, g, lip / p.lambda, abs_tol, cuts);
}

double expected_h_centered(const TestFunction& h, const CenteredGammaParams& p, double abs_tol) {
    double lip = h.lip1 ? *h.lip1 : probe_lipschitz(h.eval);
    auto g = [&](double t) { return h.eval(2.0 * t - p.nu); };
    std::vector<double> cuts;
    for (double k : h.kinks) cuts.push_back(0.5 * (k + p.nu));
    return gamma_expectation(0.5 * p.nu, g, 2.0 * lip, abs_tol, cuts);
}

double SteinSolution::f(double x) const { return impl_->f(x); }
double SteinSolution::fprime(double x) const { return impl_->fprime(x); }
double SteinSolution::fprime_integral(double x) const { return impl_->fprime_integral(x); }
double SteinSolution::expected_h() const { return impl_->eh; }
const TestFunction& SteinSolution::h() const { return impl_->h; }
bool SteinSolution::is_centered() const { return impl_->centered(); }
const SteinTarget& SteinSolution::target() const { return impl_->target; }
double SteinSolution::singular_point() const {
    return impl_->centered() ? -std::get<CenteredGammaParams>(impl_->target).nu : 0.0;
}

SteinSolution solve_stein_gamma(const TestFunction& h, const GammaParams& p,
                                const SolveOptions& opt) {
    if (!h.lip1) throw contract_error("solve_stein_gamma: h must declare lip1");
    auto impl = std::make_shared<SteinSolution::Impl>(SteinTarget{p});
    impl->h = h;
    impl->eh = expected_h(h, p);
    impl->band = opt.near_zero_band;
    impl->kink_at_singular = has_kink_at(h, 0.0);
    const double lam = p.lambda;
    TestFunction hc = h;  // copy for capture
    impl->core.r = p.r;
    impl->core.h1 = [hc, lam](double t) { return hc.eval(t / lam); };
    impl->core.h1d = [hc, lam](double t) { return hc.deriv(t / lam) / lam; };
    impl->core.eh = impl->eh;
    impl->core.quad_tol = opt.quad_tol;
    for (double k : h.kinks) impl->core.kinks.push_back(lam * k);
    return SteinSolution(impl);
}

SteinSolution solve_stein_centered(const TestFunction& h, double nu, const SolveOptions& opt) {
    if (!h.lip1) throw contract_error("solve_stein_centered: h must declare lip1");
    CenteredGammaParams p(nu);
    auto impl = std::make_shared<SteinSolution::Impl>(SteinTarget{p});
    impl->h = h;
    impl->eh = expected_h_centered(h, p);
    impl->band = opt.near_zero_band;
    impl->kink_at_singular = has_kink_at(h, -nu);
    TestFunction hc = h;
    impl->core.r = 0.5 * nu;
    impl->core.h1 = [hc, nu](double t) { return hc.eval(2.0 * t - nu); };
    impl->core.h1d = [hc, nu](double t) { return 2.0 * hc.deriv(2.0 * t - nu); };
    impl->core.eh = impl->eh;
    impl->core.quad_tol = opt.quad_tol;
    for (double k : h.kinks) impl->core.kinks.push_back(0.5 * (k + nu));
    return SteinSolution(impl);
}

SteinSolution solve_stein(const TestFunction& h, const SteinTarget& target,
                          const SolveOptions& opt) {
    if (std::holds_alternative<GammaParams>(target))
        return solve_stein_gamma(h, std::get<GammaParams>(target), opt);
    return solve_stein_centered(h, std::get<CenteredGammaParams>(target).nu, opt);
}

double stein_derivative(const SteinSolution& sol, double x) { return sol.fprime(x); }

namespace {

std::vector<double> log_grid(const CertGrid& grid, double center) {
    // per_side points on each side of `center`, log-spaced in distance.
    std::vector<double> xs;
    xs.reserve(2 * grid.per_side);
    const double lr = std::log(grid.hi / grid.lo);
    for (int i = 0; i < grid.per_side; ++i) {
        const double d = grid.lo * std::exp(lr * i / (grid.per_side - 1.0));
        xs.push_back(center - d);
        xs.push_back(center + d);
    }
    std::sort(xs.begin(), xs.end());
    return xs;
}

}  // namespace

ResidualStats residual_stats(const SteinSolution& sol, const CertGrid& grid) {
    const std::vector<double> xs = log_grid(grid, 0.0);
    const double eh = sol.expected_h();
    ResidualStats out;
    out.points = static_cast<int>(xs.size());
    std::vector<double> res(xs.size(), 0.0);
    parallel_chunks(xs.size(), 8, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double x = xs[i];
            const double fv = sol.f(x);
            const double fp = sol.fprime_integral(x);
            double r;
            if (sol.is_centered()) {
                const double nu = std::get<CenteredGammaParams>(sol.target()).nu;
                r = 2.0 * (x + nu) * fp - x * fv - (sol.h().eval(x) - eh);
            } else {
                const GammaParams& p = std::get<GammaParams>(sol.target());
                r = x * fp + (p.r - p.lambda * x) * fv - (sol.h().eval(x) - eh);
            }
            res[i] = std::abs(r);
        }
    });
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (res[i] > out.max_abs) {
            out.max_abs = res[i];
            out.at_x = xs[i];
        }
    }
    return out;
}

BoundReport certify_bounds(const TestFunction& h, const SteinTarget& target,
                           const CertGrid& grid) {
    if (!h.lip1) throw contract_error("certify_bounds: h must declare lip1");
    const double lip1 = *h.lip1;
    SteinSolution sol = solve_stein(h, target);
    const bool centered = sol.is_centered();
    const double split = centered ? -std::get<CenteredGammaParams>(target).nu : 0.0;

    const std::vector<double> xs = log_grid(grid, 0.0);
    const std::size_t n = xs.size();
    std::vector<double> fv(n), fp(n), lipf_local(n), lipfp_local(n);
    const double dq = grid.quotient_step;
    parallel_chunks(n, 4, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double x = xs[i];
            fv[i] = sol.f(x);
            fp[i] = sol.fprime(x);
            lipf_local[i] = std::abs(sol.f(x + dq) - sol.f(x - dq)) / (2.0 * dq);
            lipfp_local[i] = std::abs(sol.fprime(x + dq) - sol.fprime(x - dq)) / (2.0 * dq);
        }
    });

    double sup_f = std::abs(sol.f(split));
    double lip_f = 0.0, lip_fp = 0.0, lip_f_pos = 0.0, lip_f_neg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sup_f = std::max(sup_f, std::abs(fv[i]));
        lip_f = std::max(lip_f, lipf_local[i]);
        lip_fp = std::max(lip_fp, lipfp_local[i]);
        if (xs[i] - dq > split) lip_f_pos = std::max(lip_f_pos, lipf_local[i]);
        if (xs[i] + dq < split) lip_f_neg = std::max(lip_f_neg, lipf_local[i]);
        if (i + 1 < n) {
            const double q = std::abs(fv[i + 1] - fv[i]) / (xs[i + 1] - xs[i]);
            lip_f = std::max(lip_f, q);
            if (xs[i] > split) lip_f_pos = std::max(lip_f_pos, q);
            if (xs[i + 1] < split) lip_f_neg = std::max(lip_f_neg, q);
            lip_fp = std::max(lip_fp, std::abs(fp[i + 1] - fp[i]) / (xs[i + 1] - xs[i]));
        }
    }

    BoundReport rep;
    rep.function_name = h.name;
    rep.measured["sup_f"] = sup_f;
    rep.measured["lip_f"] = lip_f;
    rep.measured["lip_f_pos"] = lip_f_pos;
    rep.measured["lip_f_neg"] = lip_f_neg;
    if (h.lip2) rep.measured["lip_fprime"] = lip_fp;

    if (centered) {
        const double nu = std::get<CenteredGammaParams>(target).nu;
        const double cap = std::max(1.0, 2.0 / nu);
        rep.theorem["sup_f"] = lip1;
        rep.theorem["lip_f"] = cap * lip1;
        rep.theorem["lip_f_pos"] = lip1;
        rep.theorem["lip_f_neg"] = (2.0 / nu) * lip1;
        if (h.lip2) rep.theorem["lip_fprime"] = cap * lip1 + *h.lip2;
    } else {
        const GammaParams& p = std::get<GammaParams>(target);
        const double cap = std::max(1.0, 1.0 / p.r);
        rep.theorem["sup_f"] = lip1 / p.lambda;
        rep.theorem["lip_f"] = 2.0 * cap * lip1;
        rep.theorem["lip_f_pos"] = 2.0 * lip1;
        rep.theorem["lip_f_neg"] = (2.0 / p.r) * lip1;
        if (h.lip2) rep.theorem["lip_fprime"] = 4.0 * p.lambda * cap * lip1 + 2.0 * *h.lip2;
    }

    rep.pass = true;
    for (const auto& [name, measured] : rep.measured) {
        const double limit = rep.theorem.at(name);
        rep.margin[name] = limit - measured;
        rep.slack = std::max(rep.slack, 1e-7 * std::max(1.0, limit));
        if (measured > limit + 1e-7 * std::max(1.0, limit)) rep.pass = false;
    }
    return rep;
}

double explosion_witness(double r) {
    if (!(r > 0.0)) throw contract_error("explosion_witness: r must be > 0");
    // |f'_h(-1/2)| = (r+1) ∫_0^{1/2} (1/2 - t) t^{r-1} e^t dt / ((1/2)^{r+1} e^{1/2})
    // for h(x) = min(x, 0) at lambda = 1.
    const double integral = integrate_power_weight(
        r, 0.5, [](double t) { return (0.5 - t) * std::exp(t); }, 1e-13);
    return (r + 1.0) * integral / (std::pow(0.5, r + 1.0) * std::exp(0.5));
}

double higher_order_bound(int k, const GammaParams& p, const std::vector<double>& lips) {
    if (k < 1) throw contract_error("higher_order_bound: k must be >= 1");
    if (static_cast<int>(lips.size()) != k)
        throw contract_error("higher_order_bound: lips must have length k");
    auto factorial = [](int m) {
        double v = 1.0;
        for (int i = 2; i <= m; ++i) v *= i;
        return v;
    };
    double value = std::pow(2.0, k) * std::pow(p.lambda, k - 1) * factorial(k - 1) *
                   std::max(1.0, 1.0 / p.r) * lips[0];
    for (int j = 0; j <= k - 2; ++j) {
        value += std::pow(2.0, j + 1) * std::pow(p.lambda, j) *
                 (factorial(k - 1) / factorial(k - j - 1)) * lips[k - j - 1];
    }
    return value;
}

PluginBound plugin_bound(const ExchangeablePairStats& stats, double nu, double lip1,
                         double lip2) {
    if (!stats.r_zero)
        throw contract_error("plugin_bound: stats must come from a coupling with R = 0");
    // Exact stats must match the hypothesis to rounding; Monte Carlo stats
    // only within their sampling error.
    double m2_tol = 1e-6 * std::max(1.0, 2.0 * nu);
    if (!stats.exact && stats.stderrs.count("m2"))
        m2_tol = std::max(m2_tol, 6.0 * stats.stderrs.at("m2"));
    if (std::abs(stats.m2 - 2.0 * nu) > m2_tol)
        throw contract_error("plugin_bound: E[W^2] must equal 2 nu");
    if (!(stats.var_S >= 0.0) || !(stats.e_abs_dW3 >= 0.0))
        throw contract_error("plugin_bound: stats missing Var(S) or E|W'-W|^3");
    const double cap = std::max(1.0, 2.0 / nu);
    const double cubic =
        (cap * lip1 + lip2) / (6.0 * stats.lambda_pair) * stats.e_abs_dW3;
    PluginBound out;
    out.with_var_s = cap * lip1 * std::sqrt(stats.var_S) + cubic;
    out.with_abs_s = lip1 * (cap * stats.e_abs_S + stats.e_abs_R) + cubic;
    return out;
}

}  // namespace gstein
