#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "gstein/gamma_dist.hpp"
#include "gstein/pair_stats.hpp"
#include "gstein/test_function.hpp"

namespace gstein {

using SteinTarget = std::variant<GammaParams, CenteredGammaParams>;

// E[h(X_{r,lambda})] by adaptive quadrature, absolute tolerance 1e-10. The
// tail is truncated where its analytic bound drops below 1% of the tolerance.
double expected_h(const TestFunction& h, const GammaParams& p, double abs_tol = 1e-10);
double expected_h_centered(const TestFunction& h, const CenteredGammaParams& p,
                           double abs_tol = 1e-10);

// Solution of the Gamma Stein equation on all of R (head/tail integral forms
// on the positive axis, weighted integral on the negative axis, closed-form
// values in a small band around the singular point).
class SteinSolution {
  public:
    double f(double x) const;

    // f' from the defining equation away from the singular point; closed form
    // at the singular point (or 0 there when h has a kink at it).
    double fprime(double x) const;

    // Independent route: differentiation under the integral sign. Used by the
    // residual certification; never derived from the equation itself.
    double fprime_integral(double x) const;

    double expected_h() const;
    const TestFunction& h() const;

    bool is_centered() const;
    const SteinTarget& target() const;
    // 0 for the Gamma target, -nu for the centered target.
    double singular_point() const;

    struct Impl;
    explicit SteinSolution(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  private:
    std::shared_ptr<const Impl> impl_;
};

struct SolveOptions {
    double quad_tol = 1e-13;
    double near_zero_band = 1e-6;
};

SteinSolution solve_stein_gamma(const TestFunction& h, const GammaParams& p,
                                const SolveOptions& opt = {});
SteinSolution solve_stein_centered(const TestFunction& h, double nu,
                                   const SolveOptions& opt = {});
SteinSolution solve_stein(const TestFunction& h, const SteinTarget& target,
                          const SolveOptions& opt = {});

// f' at x under the solution's evaluation rules.
double stein_derivative(const SteinSolution& sol, double x);

// Grid used by the residual and bound certifications: log-spaced points with
// |x| in [lo, hi] on both sides of the singular point.
struct CertGrid {
    double lo = 1e-4;
    double hi = 50.0;
    int per_side = 160;
    double quotient_step = 1e-4;
};

struct ResidualStats {
    double max_abs = 0.0;
    double at_x = 0.0;
    int points = 0;
};

// Max |x f' + (r - lambda x) f - (h - Eh)| (resp. the centered equation) over
// the grid, with f' from the independent integral route.
ResidualStats residual_stats(const SteinSolution& sol, const CertGrid& grid);

struct BoundReport {
    std::map<std::string, double> measured;
    std::map<std::string, double> theorem;
    std::map<std::string, double> margin;  // theorem - measured
    double slack = 0.0;
    bool pass = false;
    std::string function_name;
};

// Grid estimates of sup|f|, Lip(f), Lip(f') (one-sided variants included)
// against the theorem values. Grid estimates approximate the sups from below,
// so "pass" is a necessary check, not a sufficient one.
BoundReport certify_bounds(const TestFunction& h, const SteinTarget& target,
                           const CertGrid& grid = {});

// |f'_h(-1/2)| for h(x) = min(x,0) at lambda = 1, from the closed-form
// representation; diverges like 1/r as r -> 0.
double explosion_witness(double r);

// Lipschitz bound for the k-th derivative of the Stein solution given
// lips = (||h'||, ..., ||h^{(k)}||).
double higher_order_bound(int k, const GammaParams& p, const std::vector<double>& lips);

struct PluginBound {
    double with_var_s = 0.0;   // max(1,2/nu) lip1 sqrt(Var S) + cubic term
    double with_abs_s = 0.0;   // lip1 (max(1,2/nu) E|S| + E|R|) + cubic term
};

// Exchangeable-pair plug-in bound; requires stats built with R = 0 and
// E[W^2] = 2 nu.
PluginBound plugin_bound(const ExchangeablePairStats& stats, double nu, double lip1, double lip2);

}  // namespace gstein
