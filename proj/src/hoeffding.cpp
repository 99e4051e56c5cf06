#include "gstein/hoeffding.hpp"

#include <bit>
#include <cmath>

#include "gstein/errors.hpp"
#include "gstein/parallel.hpp"

namespace gstein {

void DiscreteFactor::validate() const {
    if (values.empty() || values.size() != probs.size())
        throw contract_error("DiscreteFactor: values/probs size mismatch");
    KahanSum total;
    for (double p : probs) {
        if (!(p > 0.0)) throw contract_error("DiscreteFactor: probabilities must be positive");
        total.add(p);
    }
    if (std::abs(total.value() - 1.0) > 1e-12)
        throw contract_error("DiscreteFactor: probabilities must sum to 1");
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = i + 1; j < values.size(); ++j)
            if (values[i] == values[j]) throw contract_error("DiscreteFactor: atoms must be distinct");
}

std::size_t DiscreteProductSpace::total_points() const {
    std::size_t total = 1;
    for (const auto& f : factors) {
        if (f.values.empty()) throw contract_error("DiscreteProductSpace: empty factor");
        if (total > cap * 8 / f.values.size() + 1) return cap + 1;  // saturate, avoid overflow
        total *= f.values.size();
    }
    return total;
}

void DiscreteProductSpace::require_within_cap(const char* op) const {
    std::size_t total = total_points();
    if (total > cap) throw resource_error(std::string(op) + ": enumeration cap exceeded", total);
}

void DiscreteProductSpace::validate() const {
    if (factors.empty()) throw contract_error("DiscreteProductSpace: n must be >= 1");
    if (factors.size() > 63) throw contract_error("DiscreteProductSpace: n must be <= 63");
    for (const auto& f : factors) f.validate();
}

namespace {

std::vector<int> mask_coords(std::uint64_t mask, int n) {
    std::vector<int> coords;
    for (int j = 0; j < n; ++j)
        if (mask >> j & 1) coords.push_back(j);
    return coords;
}

std::size_t table_size(const DiscreteProductSpace& s, const std::vector<int>& coords) {
    std::size_t sz = 1;
    for (int j : coords) sz *= s.factors[j].values.size();
    return sz;
}

}  // namespace

std::vector<double> eval_kernel_table(const UStatKernel& k, const DiscreteProductSpace& s) {
    s.validate();
    s.require_within_cap("eval_kernel_table");
    const int n = s.n();
    const std::size_t total = s.total_points();
    std::vector<double> table(total);
    parallel_chunks(total, 8192, [&](std::size_t, std::size_t b, std::size_t e) {
        std::vector<double> atoms(n);
        std::vector<std::size_t> idx(n);
        for (std::size_t flat = b; flat < e; ++flat) {
            std::size_t rem = flat;
            for (int j = 0; j < n; ++j) {
                const std::size_t m = s.factors[j].values.size();
                idx[j] = rem % m;
                rem /= m;
                atoms[j] = s.factors[j].values[idx[j]];
            }
            double v = k.psi(std::span<const double>(atoms));
            if (!std::isfinite(v))
                throw contract_error("UStatKernel: psi not finite on the product support");
            table[flat] = v;
        }
    });
    return table;
}

double outcome_probability(const DiscreteProductSpace& s, std::size_t flat) {
    double p = 1.0;
    for (int j = 0; j < s.n(); ++j) {
        const std::size_t m = s.factors[j].values.size();
        p *= s.factors[j].probs[flat % m];
        flat /= m;
    }
    return p;
}

namespace {

// E[W | F_L] from a precomputed kernel table; one pass over the outcomes.
ComponentTable conditional_from_table(const std::vector<double>& w,
                                      const DiscreteProductSpace& s, std::uint64_t L) {
    const int n = s.n();
    ComponentTable out;
    out.mask = L;
    out.coords = mask_coords(L, n);
    out.values.assign(table_size(s, out.coords), 0.0);
    std::vector<KahanSum> cells(out.values.size());
    std::vector<std::size_t> idx(n);
    const std::size_t total = w.size();
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        double p_out = 1.0;
        std::size_t cell = 0, stride = 1;
        for (int j = 0; j < n; ++j) {
            const std::size_t m = s.factors[j].values.size();
            const std::size_t ij = rem % m;
            rem /= m;
            if (L >> j & 1) {
                cell += ij * stride;
                stride *= m;
            } else {
                p_out *= s.factors[j].probs[ij];
            }
        }
        cells[cell].add(w[flat] * p_out);
    }
    for (std::size_t c = 0; c < cells.size(); ++c) out.values[c] = cells[c].value();
    return out;
}

// Index of the sub-cell of `sub` (coords ⊆ coords of `full`) matching the
// cell `cell` of `full`.
std::size_t subcell_index(const DiscreteProductSpace& s, const std::vector<int>& full_coords,
                          std::size_t cell, const std::vector<int>& sub_coords) {
    std::size_t out = 0, stride = 1;
    std::size_t si = 0;
    for (int j : full_coords) {
        const std::size_t m = s.factors[j].values.size();
        const std::size_t ij = cell % m;
        cell /= m;
        if (si < sub_coords.size() && sub_coords[si] == j) {
            out += ij * stride;
            stride *= m;
            ++si;
        }
    }
    return out;
}

double cell_probability(const DiscreteProductSpace& s, const std::vector<int>& coords,
                        std::size_t cell) {
    double p = 1.0;
    for (int j : coords) {
        const std::size_t m = s.factors[j].values.size();
        p *= s.factors[j].probs[cell % m];
        cell /= m;
    }
    return p;
}

// W_J = sum_{L ⊆ J} (-1)^{|J|-|L|} E[W|F_L], assembled from precomputed
// conditional tables (indexed by mask).
ComponentTable moebius_component(const DiscreteProductSpace& s,
                                 const std::map<std::uint64_t, ComponentTable>& cond,
                                 std::uint64_t J) {
    const int n = s.n();
    ComponentTable out;
    out.mask = J;
    out.coords = mask_coords(J, n);
    out.values.assign(table_size(s, out.coords), 0.0);
    const int jbits = std::popcount(J);
    // Enumerate L ⊆ J.
    std::uint64_t L = J;
    for (;;) {
        const ComponentTable& t = cond.at(L);
        const double sign = ((jbits - std::popcount(L)) % 2 == 0) ? 1.0 : -1.0;
        for (std::size_t cell = 0; cell < out.values.size(); ++cell)
            out.values[cell] += sign * t.values[subcell_index(s, out.coords, cell, t.coords)];
        if (L == 0) break;
        L = (L - 1) & J;
    }
    return out;
}

double component_sigma2(const DiscreteProductSpace& s, const ComponentTable& t) {
    KahanSum acc;
    for (std::size_t cell = 0; cell < t.values.size(); ++cell)
        acc.add(cell_probability(s, t.coords, cell) * t.values[cell] * t.values[cell]);
    return acc.value();
}

double component_moment4(const DiscreteProductSpace& s, const ComponentTable& t) {
    KahanSum acc;
    for (std::size_t cell = 0; cell < t.values.size(); ++cell) {
        const double v2 = t.values[cell] * t.values[cell];
        acc.add(cell_probability(s, t.coords, cell) * v2 * v2);
    }
    return acc.value();
}

}  // namespace

ComponentTable conditional_expectation(const UStatKernel& k, const DiscreteProductSpace& s,
                                       std::uint64_t L) {
    const std::vector<double> w = eval_kernel_table(k, s);
    return conditional_from_table(w, s, L);
}

HoeffdingDecomposition hoeffding_decompose(const UStatKernel& k, const DiscreteProductSpace& s) {
    s.validate();
    const int n = s.n();
    if (n > 24) throw resource_error("hoeffding_decompose: 2^n subsets out of reach", 1ull << n);
    const std::vector<double> w = eval_kernel_table(k, s);
    const std::uint64_t n_masks = 1ull << n;

    std::vector<ComponentTable> cond_vec(n_masks);
    parallel_chunks(n_masks, 4, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t m = b; m < e; ++m) cond_vec[m] = conditional_from_table(w, s, m);
    });
    std::map<std::uint64_t, ComponentTable> cond;
    for (std::uint64_t m = 0; m < n_masks; ++m) cond[m] = std::move(cond_vec[m]);

    HoeffdingDecomposition dec;
    dec.n = n;
    dec.mean = cond.at(0).values[0];
    std::vector<ComponentTable> comp_vec(n_masks);
    parallel_chunks(n_masks, 4, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t m = b; m < e; ++m)
            if (m != 0) comp_vec[m] = moebius_component(s, cond, m);
    });
    for (std::uint64_t m = 1; m < n_masks; ++m) {
        dec.sigma2[m] = component_sigma2(s, comp_vec[m]);
        dec.components[m] = std::move(comp_vec[m]);
    }
    return dec;
}

DegeneracyReport verify_degeneracy(const HoeffdingDecomposition& dec, int d, double tol) {
    DegeneracyReport rep;
    rep.degenerate = true;
    if (d > 0 && std::abs(dec.mean) > tol) {
        rep.degenerate = false;
        rep.offending.push_back(0);
        rep.worst_abs = std::abs(dec.mean);
    }
    for (const auto& [mask, table] : dec.components) {
        if (std::popcount(mask) == d) continue;
        double worst = 0.0;
        for (double v : table.values) worst = std::max(worst, std::abs(v));
        if (worst > tol) {
            rep.degenerate = false;
            rep.offending.push_back(mask);
            rep.worst_abs = std::max(rep.worst_abs, worst);
        }
    }
    return rep;
}

ComponentStats component_stats(const HoeffdingDecomposition& dec, int d,
                               const DiscreteProductSpace& s) {
    ComponentStats st;
    std::vector<double> per_coord(dec.n, 0.0);
    bool any_positive = false;
    for (const auto& [mask, table] : dec.components) {
        if (std::popcount(mask) != d) continue;
        const double s2 = dec.sigma2.at(mask);
        st.sigma2_list.push_back(s2);
        for (int j = 0; j < dec.n; ++j)
            if (mask >> j & 1) per_coord[j] += s2;
        if (s2 > 0.0) {
            any_positive = true;
            const double m4 = component_moment4(s, table);
            st.bigD = std::max(st.bigD, m4 / (s2 * s2));
        }
    }
    if (!any_positive)
        throw contract_error("component_stats: every order-d component vanishes, D undefined");
    for (double v : per_coord) st.rho2 = std::max(st.rho2, v);
    return st;
}

OrderComponents order_d_components(const UStatKernel& k, const DiscreteProductSpace& s, int d) {
    s.validate();
    const int n = s.n();
    if (d < 1 || d > n) throw contract_error("order_d_components: bad order");
    const std::vector<double> w = eval_kernel_table(k, s);

    // Conditional tables for every |L| <= d.
    std::vector<std::uint64_t> masks;
    for (std::uint64_t m = 0; m < (1ull << n); ++m)
        if (std::popcount(m) <= d) masks.push_back(m);
    std::vector<ComponentTable> cond_vec(masks.size());
    parallel_chunks(masks.size(), 2, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) cond_vec[i] = conditional_from_table(w, s, masks[i]);
    });
    std::map<std::uint64_t, ComponentTable> cond;
    for (std::size_t i = 0; i < masks.size(); ++i) cond[masks[i]] = std::move(cond_vec[i]);

    OrderComponents out;
    out.mean = cond.at(0).values[0];
    std::vector<std::uint64_t> dmasks;
    for (std::uint64_t m : masks)
        if (std::popcount(m) == d) dmasks.push_back(m);
    std::vector<ComponentTable> comp_vec(dmasks.size());
    parallel_chunks(dmasks.size(), 2, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) comp_vec[i] = moebius_component(s, cond, dmasks[i]);
    });
    for (std::size_t i = 0; i < dmasks.size(); ++i) {
        out.sigma2[dmasks[i]] = component_sigma2(s, comp_vec[i]);
        out.components[dmasks[i]] = std::move(comp_vec[i]);
    }

    // Pointwise reconstruction: W(x) = mean + sum_J W_J(x) iff the kernel is
    // degenerate of order d (uniqueness of the decomposition).
    const std::size_t total = w.size();
    std::vector<double> err(total, 0.0);
    std::vector<const ComponentTable*> comps;
    for (const auto& [mask, t] : out.components) comps.push_back(&t);
    parallel_chunks(total, 8192, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t flat = b; flat < e; ++flat) {
            KahanSum sum;
            sum.add(out.mean);
            for (const ComponentTable* t : comps) sum.add(table_value_at(*t, s, flat));
            err[flat] = std::abs(sum.value() - w[flat]);
        }
    });
    for (double v : err) out.reconstruction_error = std::max(out.reconstruction_error, v);
    return out;
}

double table_value_at(const ComponentTable& t, const DiscreteProductSpace& s, std::size_t flat) {
    std::size_t cell = 0, stride = 1;
    std::size_t ci = 0;
    for (int j = 0; j < s.n() && ci < t.coords.size(); ++j) {
        const std::size_t m = s.factors[j].values.size();
        const std::size_t ij = flat % m;
        flat /= m;
        if (t.coords[ci] == j) {
            cell += ij * stride;
            stride *= m;
            ++ci;
        }
    }
    return t.values[cell];
}

DiscreteFactor rademacher_factor() {
    DiscreteFactor f;
    f.values = {-1.0, 1.0};
    f.probs = {0.5, 0.5};
    return f;
}

DiscreteProductSpace rademacher_space(int n) {
    DiscreteProductSpace s;
    for (int i = 0; i < n; ++i) s.factors.push_back(rademacher_factor());
    return s;
}

}  // namespace gstein
