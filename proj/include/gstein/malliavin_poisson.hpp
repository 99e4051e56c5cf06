#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gstein/test_function.hpp"

namespace gstein {

// Discretized Poisson random measure: m cells with control weights mu.
struct PoissonSpace {
    std::vector<double> mu;
    int m() const { return static_cast<int>(mu.size()); }
    double total() const;
    void validate() const;
};

// Chaos orders p in {1, 2} and mixtures; p = 2 kernels are symmetric with an
// exactly zero diagonal (row-major m x m).
struct PoissonChaosFunctional {
    struct Level {
        int p = 1;
        std::vector<double> kernel;
    };
    PoissonSpace space;
    std::vector<Level> levels;

    void validate() const;
    bool pure_order(int p) const;
};

// One draw of the cell counts, deterministic given seed.
std::vector<long> sample_counts(const PoissonSpace& space, std::uint64_t seed);

double eval_poisson_chaos(const PoissonChaosFunctional& F, std::span<const long> counts);

// Add-one-point derivative of an arbitrary functional of the counts.
double add_point_derivative(const std::function<double(std::span<const long>)>& f_eval,
                            std::span<const long> counts, int z);

// Closed-form chaos derivative D_z F = p I_{p-1}(f(z, .)).
double chaos_derivative(const PoissonChaosFunctional& F, std::span<const long> counts, int z);

// -D_z L^{-1} F (1/p grading).
double chaos_l_inverse_derivative(const PoissonChaosFunctional& F, std::span<const long> counts,
                                  int z);

// <DF, -DL^{-1}F>_{L^2(mu)} at the given configuration.
double poisson_inner(const PoissonChaosFunctional& F, std::span<const long> counts);

double poisson_chaos_variance(const PoissonChaosFunctional& F);

std::vector<double> sample_poisson_chaos(const PoissonChaosFunctional& F, std::size_t n_samples,
                                         std::uint64_t seed);

struct PoissonBoundReport {
    double first_term = 0.0;     // max(1,2/nu) E|2(F+nu) - <DF,-DL^{-1}F>|
    double first_term_l2 = 0.0;  // L2 variant
    double second_term = 0.0;    // max(1,1/nu+1/2) * cubic integral
    double bound = 0.0;          // first_term + second_term
    double bound_l2 = 0.0;
    double stderr_first = 0.0;
    double stderr_second = 0.0;
};

PoissonBoundReport poisson_gamma_bound(const PoissonChaosFunctional& F, double nu,
                                       std::size_t n_samples, std::uint64_t seed);

struct IbpReport {
    double lhs = 0.0;            // E[F g(F)]
    double rhs = 0.0;            // E[<D g(F), -DL^{-1}F>]
    double diff = 0.0;
    double pooled_stderr = 0.0;  // batch-means stderr of the per-sample difference
};

IbpReport ibp_check(const PoissonChaosFunctional& F, const TestFunction& g,
                    std::size_t n_samples, std::uint64_t seed);

// Named kernels.
PoissonChaosFunctional poisson_indicator(const PoissonSpace& space, int cells_in_B,
                                         double coefficient);  // p=1, f = c * 1_B
PoissonChaosFunctional poisson_offdiag_constant(const PoissonSpace& space, double value);

}  // namespace gstein
