#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gstein {

// One independent discrete coordinate: atom values and their probabilities.
struct DiscreteFactor {
    std::vector<double> values;
    std::vector<double> probs;
    void validate() const;  // probs sum to 1 within 1e-12, atoms distinct
};

struct DiscreteProductSpace {
    std::vector<DiscreteFactor> factors;
    std::size_t cap = 2000000;  // enumeration cap on the product size

    int n() const { return static_cast<int>(factors.size()); }
    std::size_t total_points() const;
    void require_within_cap(const char* op) const;
    void validate() const;
};

struct UStatKernel {
    std::function<double(std::span<const double>)> psi;
    std::optional<int> declared_order;
};

// Dense value table over the coordinates in `coords` (ascending), coordinate
// coords[0] fastest.
struct ComponentTable {
    std::uint64_t mask = 0;
    std::vector<int> coords;
    std::vector<double> values;
};

struct HoeffdingDecomposition {
    int n = 0;
    double mean = 0.0;  // component for J = empty set
    std::map<std::uint64_t, ComponentTable> components;  // nonempty J
    std::map<std::uint64_t, double> sigma2;
};

// Table of psi over the full product space (mixed radix, coordinate 0
// fastest). The shared precomputation for everything below.
std::vector<double> eval_kernel_table(const UStatKernel& k, const DiscreteProductSpace& s);

// Probability of the outcome with the given flat index.
double outcome_probability(const DiscreteProductSpace& s, std::size_t flat);

// E[W | F_L] as a table over the coordinates in the bitmask L.
ComponentTable conditional_expectation(const UStatKernel& k, const DiscreteProductSpace& s,
                                       std::uint64_t L);

// Full decomposition over all 2^n subsets via the alternating-sum formula.
HoeffdingDecomposition hoeffding_decompose(const UStatKernel& k, const DiscreteProductSpace& s);

// Exact-rational route (probabilities and kernel values are dyadic, so the
// conversion is lossless); used as an oracle for the double-precision path.
HoeffdingDecomposition hoeffding_decompose_exact(const UStatKernel& k,
                                                 const DiscreteProductSpace& s);

// Rational-arithmetic verification that the decomposition reconstructs W
// exactly and that distinct components are exactly orthogonal.
bool exact_orthogonality_and_reconstruction(const UStatKernel& k,
                                            const DiscreteProductSpace& s);

struct DegeneracyReport {
    bool degenerate = false;
    std::vector<std::uint64_t> offending;
    double worst_abs = 0.0;
};

DegeneracyReport verify_degeneracy(const HoeffdingDecomposition& dec, int d, double tol);

struct ComponentStats {
    double rho2 = 0.0;
    double bigD = 0.0;
    std::vector<double> sigma2_list;  // over |J| = d in mask order
};

// rho^2 = max_i sum_{K ∋ i, |K|=d} sigma2_K and D = max_J E[W_J^4]/sigma_J^4.
// Zero-variance components are excluded from the D maximum; if every order-d
// component vanishes, D is undefined and this throws.
ComponentStats component_stats(const HoeffdingDecomposition& dec, int d,
                               const DiscreteProductSpace& s);

// Order-d components only (conditional expectations for |L| <= d), plus the
// max pointwise reconstruction error |W - sum_J W_J|. A zero reconstruction
// error certifies degeneracy of order d by uniqueness of the decomposition;
// this is the path used for larger n where all 2^n subsets are out of reach.
struct OrderComponents {
    std::map<std::uint64_t, ComponentTable> components;
    std::map<std::uint64_t, double> sigma2;
    double mean = 0.0;
    double reconstruction_error = 0.0;
};
OrderComponents order_d_components(const UStatKernel& k, const DiscreteProductSpace& s, int d);

// Helpers shared with dejong: value of a component table at a full outcome.
double table_value_at(const ComponentTable& t, const DiscreteProductSpace& s, std::size_t flat);

// Seeded factories used by tests and the CLI.
DiscreteFactor rademacher_factor();
DiscreteProductSpace rademacher_space(int n);

}  // namespace gstein
