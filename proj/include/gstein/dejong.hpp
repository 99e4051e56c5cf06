#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gstein/hoeffding.hpp"
#include "gstein/pair_stats.hpp"

namespace gstein {

// A kernel family instance: space, kernel, degeneracy order, nu = E[W^2]/2.
struct KernelInstance {
    std::string name;
    DiscreteProductSpace space;
    UStatKernel kernel;
    int d = 1;
    double nu = 1.0;
};

// Built-in families.
KernelInstance rademacher_quadratic(int n);  // c sum_{i<j} x_i x_j with m2 = 2, nu = 1
// Homogeneous multilinear form of degree d with seeded coefficients over
// Rademacher factors, normalized so that E[W^2] = 2 nu.
KernelInstance multilinear_form(int n, int d, double nu, std::uint64_t seed);
KernelInstance family_by_name(const std::string& name, int n, double nu, std::uint64_t seed);

struct PairMode {
    bool exact = true;
    std::uint64_t seed = 0;
    std::size_t n_samples = 0;  // mc mode; must be >= 1000
};

// Exact mode enumerates (X, Y_alpha, alpha) at cost n * |Omega| * max_j
// |support_j| kernel-table lookups; mc mode estimates the same quantities
// with batch-means standard errors. The declared nu is checked against
// m2 / 2 (1e-6 relative) in exact mode.
ExchangeablePairStats build_pair_stats(const UStatKernel& k, const DiscreteProductSpace& s,
                                       int d, double nu, const PairMode& mode = {});

// Max over outcomes of |E[W'-W | X=x] + (d/n) W(x)|; exactly 0 in theory.
double regression_residual(const UStatKernel& k, const DiscreteProductSpace& s, int d);

// Hoeffding route for S = S1 + S2/2 with U_M the components of W^2.
struct SDecomposition {
    double u_empty = 0.0;        // E[W^2]
    double var_S1 = 0.0;
    double var_S2 = 0.0;
    double var_S_total = 0.0;    // Var(S1) + Var(S2)/4
    double var_S_direct = 0.0;   // from the pair enumeration
    double ew3 = 0.0;            // E[W^3] by direct enumeration
    double ew3_from_cov = 0.0;   // sum_J Cov(W_J, U_J)
    double var_s2_identity = 0.0;  // sum_J Var(U_J) + 32 nu - 8 E[W^3]
};
SDecomposition hoeffding_S_decomposition(const UStatKernel& k, const DiscreteProductSpace& s,
                                         int d, double nu);

// Lemma-level exchangeable-pair moment identities, exact mode.
struct MomentIdentityReport {
    double m4_lhs = 0.0, m4_rhs = 0.0;
    double m3_lhs = 0.0, m3_rhs = 0.0;
    double worst_abs_dev = 0.0;
};
MomentIdentityReport moment_identities_check(const UStatKernel& k,
                                             const DiscreteProductSpace& s, int d);

struct CdPolicy {
    enum class Mode { exact_quadsum, user_constant, require };
    Mode mode = Mode::exact_quadsum;
    double c_d = 0.0;  // used by user_constant
};

struct DeJongBound {
    double moment_functional = 0.0;  // E W^4 - 12 E W^3 - 12 nu^2 + 48 nu
    double moment_term = 0.0;
    double rho_term = 0.0;   // via the policy route (quadsum or user C_d)
    double total = 0.0;      // moment_term + rho_term
    double exact_variant_total = 0.0;  // plug-in pipeline with exact Var(S), E|dW|^3

    // Side-by-side route with B = n E[(W'-W)^4] enumerated exactly.
    double rho_term_pair4 = 0.0;
    double total_pair4 = 0.0;

    double rho2 = 0.0;
    double bigD = 0.0;
    double quad_sum = 0.0;      // sum_{J∩K∩L∩M != 0} |∩| sigma_J sigma_K sigma_L sigma_M
    double total_without_D = 0.0;  // policy route with D replaced by 1
};

DeJongBound dejong_bound(const UStatKernel& k, const DiscreteProductSpace& s, int d, double nu,
                         const CdPolicy& policy = {});

struct DemoRow {
    int n = 0;
    double moment_discrepancy = 0.0;
    double rho2 = 0.0;
    double bigD = 0.0;
    double bound = 0.0;         // two-term bound, B = n E[(W'-W)^4] route
    double exact_variant = 0.0;
    double emp_d2 = 0.0;
    double emp_d1 = 0.0;
    bool exact = true;
};

struct DemoOptions {
    std::size_t n_samples = 200000;
    std::uint64_t seed = 0;
};

std::vector<DemoRow> demo_sequence(const std::string& family, const std::vector<int>& n_list,
                                   double nu, const DemoOptions& opt = {});

// Samples of W under the product law, one substream per sample.
std::vector<double> sample_kernel(const UStatKernel& k, const DiscreteProductSpace& s,
                                  std::size_t n_samples, std::uint64_t seed);

// Joint (W, W') table for the swap-symmetry check: entries (w, w', prob).
struct JointEntry {
    double w, w_prime, prob;
};
std::vector<JointEntry> joint_pair_table(const UStatKernel& k, const DiscreteProductSpace& s);

}  // namespace gstein
