#include <bit>
#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <vector>

#include "gstein/errors.hpp"
#include "gstein/hoeffding.hpp"

namespace gstein {

namespace {

using Rat = boost::multiprecision::cpp_rational;

struct RatTable {
    std::vector<int> coords;
    std::vector<Rat> values;
};

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

std::size_t subcell_index(const DiscreteProductSpace& s, const std::vector<int>& full_coords,
                          std::size_t cell, const std::vector<int>& sub_coords) {
    std::size_t out = 0, stride = 1, si = 0;
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

struct RatModel {
    std::vector<std::vector<Rat>> probs;  // per factor
    std::vector<Rat> w;                   // kernel over the product space
};

RatModel build_model(const UStatKernel& k, const DiscreteProductSpace& s) {
    s.validate();
    s.require_within_cap("hoeffding exact mode");
    RatModel m;
    m.probs.resize(s.n());
    for (int j = 0; j < s.n(); ++j)
        for (double p : s.factors[j].probs) m.probs[j].push_back(Rat(p));
    const std::vector<double> table = eval_kernel_table(k, s);
    m.w.reserve(table.size());
    for (double v : table) m.w.push_back(Rat(v));
    return m;
}

RatTable conditional(const RatModel& model, const DiscreteProductSpace& s, std::uint64_t L) {
    RatTable out;
    out.coords = mask_coords(L, s.n());
    out.values.assign(table_size(s, out.coords), Rat(0));
    for (std::size_t flat = 0; flat < model.w.size(); ++flat) {
        std::size_t rem = flat, cell = 0, stride = 1;
        Rat p_out(1);
        for (int j = 0; j < s.n(); ++j) {
            const std::size_t m = s.factors[j].values.size();
            const std::size_t ij = rem % m;
            rem /= m;
            if (L >> j & 1) {
                cell += ij * stride;
                stride *= m;
            } else {
                p_out *= model.probs[j][ij];
            }
        }
        out.values[cell] += model.w[flat] * p_out;
    }
    return out;
}

std::map<std::uint64_t, RatTable> all_components(const RatModel& model,
                                                 const DiscreteProductSpace& s) {
    const int n = s.n();
    const std::uint64_t n_masks = 1ull << n;
    std::map<std::uint64_t, RatTable> cond;
    for (std::uint64_t m = 0; m < n_masks; ++m) cond[m] = conditional(model, s, m);
    std::map<std::uint64_t, RatTable> comp;
    for (std::uint64_t J = 0; J < n_masks; ++J) {
        RatTable t;
        t.coords = mask_coords(J, n);
        t.values.assign(table_size(s, t.coords), Rat(0));
        const int jbits = std::popcount(J);
        std::uint64_t L = J;
        for (;;) {
            const RatTable& c = cond.at(L);
            const bool pos = (jbits - std::popcount(L)) % 2 == 0;
            for (std::size_t cell = 0; cell < t.values.size(); ++cell) {
                const Rat& v = c.values[subcell_index(s, t.coords, cell, c.coords)];
                if (pos)
                    t.values[cell] += v;
                else
                    t.values[cell] -= v;
            }
            if (L == 0) break;
            L = (L - 1) & J;
        }
        comp[J] = std::move(t);
    }
    return comp;
}

Rat cell_probability(const RatModel& model, const DiscreteProductSpace& s,
                     const std::vector<int>& coords, std::size_t cell) {
    Rat p(1);
    for (int j : coords) {
        const std::size_t m = s.factors[j].values.size();
        p *= model.probs[j][cell % m];
        cell /= m;
    }
    return p;
}

Rat table_value_at_rat(const RatTable& t, const DiscreteProductSpace& s, std::size_t flat) {
    std::size_t cell = 0, stride = 1, ci = 0;
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

}  // namespace

HoeffdingDecomposition hoeffding_decompose_exact(const UStatKernel& k,
                                                 const DiscreteProductSpace& s) {
    const RatModel model = build_model(k, s);
    auto comp = all_components(model, s);
    HoeffdingDecomposition dec;
    dec.n = s.n();
    dec.mean = static_cast<double>(comp.at(0).values[0]);
    for (auto& [mask, t] : comp) {
        if (mask == 0) continue;
        ComponentTable ct;
        ct.mask = mask;
        ct.coords = t.coords;
        Rat s2(0);
        for (std::size_t cell = 0; cell < t.values.size(); ++cell) {
            ct.values.push_back(static_cast<double>(t.values[cell]));
            s2 += cell_probability(model, s, t.coords, cell) * t.values[cell] * t.values[cell];
        }
        dec.sigma2[mask] = static_cast<double>(s2);
        dec.components[mask] = std::move(ct);
    }
    return dec;
}

bool exact_orthogonality_and_reconstruction(const UStatKernel& k,
                                            const DiscreteProductSpace& s) {
    const RatModel model = build_model(k, s);
    auto comp = all_components(model, s);
    const std::uint64_t n_masks = 1ull << s.n();

    // Reconstruction: sum of all components equals W at every outcome.
    for (std::size_t flat = 0; flat < model.w.size(); ++flat) {
        Rat sum(0);
        for (std::uint64_t m = 0; m < n_masks; ++m)
            sum += table_value_at_rat(comp.at(m), s, flat);
        if (sum != model.w[flat]) return false;
    }

    // Orthogonality: E[W_J W_K] = 0 for J != K (rational arithmetic).
    for (std::uint64_t J = 0; J < n_masks; ++J) {
        for (std::uint64_t K = J + 1; K < n_masks; ++K) {
            Rat e(0);
            for (std::size_t flat = 0; flat < model.w.size(); ++flat) {
                Rat p(1);
                std::size_t rem = flat;
                for (int j = 0; j < s.n(); ++j) {
                    const std::size_t m = s.factors[j].values.size();
                    p *= model.probs[j][rem % m];
                    rem /= m;
                }
                e += p * table_value_at_rat(comp.at(J), s, flat) *
                     table_value_at_rat(comp.at(K), s, flat);
            }
            if (e != 0) return false;
        }
    }
    return true;
}

}  // namespace gstein
