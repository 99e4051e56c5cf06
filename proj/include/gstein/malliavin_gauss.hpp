#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gstein {

// Finite-dimensional isonormal model: chaos orders p in {1, 2} and mixtures.
// p = 1 kernels are vectors, p = 2 kernels symmetric dim x dim tables
// (row-major).
struct GaussChaosFunctional {
    struct Level {
        int p = 1;
        std::vector<double> kernel;
    };
    int dim = 0;
    std::vector<Level> levels;

    void validate() const;
    bool pure_order(int p) const;  // single level of the given order
};

GaussChaosFunctional gauss_identity_nu(int nu_coords, int dim = 0);
GaussChaosFunctional gauss_perturbed(int nu_coords, double eps, int dim = 0);
GaussChaosFunctional gauss_from_eigenvalues(const std::vector<double>& eigs);

double eval_chaos(const GaussChaosFunctional& F, std::span<const double> x);

// <DF, -DL^{-1}F> with the 1/p grading per chaos level.
double malliavin_inner(const GaussChaosFunctional& F, std::span<const double> x);

// Var(F) from the kernels: sum over levels of p! ||f_p||^2.
double chaos_variance(const GaussChaosFunctional& F);

std::vector<double> sample_chaos(const GaussChaosFunctional& F, std::size_t n_samples,
                                 std::uint64_t seed);

struct GaussBoundResult {
    double l1_term = 0.0;   // E|2(F+nu) - <DF,-DL^{-1}F>|
    double l2_term = 0.0;   // E[(...)^2]^{1/2}
    double bound = 0.0;     // max(1, 2/nu) * l1_term
    double bound_l2 = 0.0;  // max(1, 2/nu) * l2_term
    double stderr_ = 0.0;   // batch-means standard error of l1_term
};

GaussBoundResult gauss_gamma_bound(const GaussChaosFunctional& F, double nu,
                                   std::size_t n_samples, std::uint64_t seed);

// L1 majorant per element of a sequence; exhibits the convergence criterion.
std::vector<double> sar_condition_trend(const std::vector<GaussChaosFunctional>& seq, double nu,
                                        std::size_t n_samples, std::uint64_t seed);

// Binned conditional-expectation estimator of E|E{A | F}|; biased, reported
// for diagnostics only and never used in acceptance checks.
double conditional_l1_diagnostic(const GaussChaosFunctional& F, double nu,
                                 std::size_t n_samples, std::uint64_t seed, int bins = 64);

}  // namespace gstein
