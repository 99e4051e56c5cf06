#include "gstein/malliavin_poisson.hpp"

#include <algorithm>
#include <cmath>

#include "gstein/errors.hpp"
#include "gstein/parallel.hpp"
#include "gstein/rng.hpp"

namespace gstein {

double PoissonSpace::total() const {
    KahanSum s;
    for (double v : mu) s.add(v);
    return s.value();
}

void PoissonSpace::validate() const {
    if (mu.empty()) throw contract_error("PoissonSpace: needs at least one cell");
    for (double v : mu)
        if (!(v > 0.0) || !std::isfinite(v))
            throw contract_error("PoissonSpace: control weights must be positive and finite");
}

void PoissonChaosFunctional::validate() const {
    space.validate();
    if (levels.empty()) throw contract_error("PoissonChaosFunctional: no chaos levels");
    const int m = space.m();
    for (const Level& l : levels) {
        if (l.p != 1 && l.p != 2)
            throw contract_error("PoissonChaosFunctional: order must be 1 or 2");
        const std::size_t want = l.p == 1 ? m : static_cast<std::size_t>(m) * m;
        if (l.kernel.size() != want)
            throw contract_error("PoissonChaosFunctional: kernel size mismatch");
        if (l.p == 2) {
            for (int i = 0; i < m; ++i) {
                if (l.kernel[i * m + i] != 0.0)
                    throw contract_error("PoissonChaosFunctional: diagonal must be exactly 0");
                for (int j = i + 1; j < m; ++j)
                    if (std::abs(l.kernel[i * m + j] - l.kernel[j * m + i]) > 1e-14)
                        throw contract_error("PoissonChaosFunctional: kernel must be symmetric");
            }
        }
    }
}

bool PoissonChaosFunctional::pure_order(int p) const {
    return levels.size() == 1 && levels[0].p == p;
}

std::vector<long> sample_counts(const PoissonSpace& space, std::uint64_t seed) {
    space.validate();
    Rng rng(seed, 0);
    std::vector<long> counts(space.m());
    for (int i = 0; i < space.m(); ++i) counts[i] = rng.poisson(space.mu[i]);
    return counts;
}

namespace {

// Compensated counts y_i = counts_i - mu_i.
void compensated(const PoissonSpace& s, std::span<const long> counts, std::vector<double>& y) {
    y.resize(s.m());
    for (int i = 0; i < s.m(); ++i) y[i] = static_cast<double>(counts[i]) - s.mu[i];
}

}  // namespace


namespace {

// Per-configuration state: y = compensated counts, c = merged order-1 kernel,
// g = sum over order-2 levels of (K y). Then D_z = c_z + 2 g_z,
// -D_z L^{-1} = c_z + g_z and F = <c + g, y>.
struct ChaosState {
    std::vector<double> y, c, g;
};

void build_state(const PoissonChaosFunctional& F, std::span<const long> counts,
                 ChaosState& st) {
    const int m = F.space.m();
    compensated(F.space, counts, st.y);
    st.c.assign(m, 0.0);
    st.g.assign(m, 0.0);
    for (const auto& l : F.levels) {
        if (l.p == 1) {
            for (int i = 0; i < m; ++i) st.c[i] += l.kernel[i];
        } else {
            for (int i = 0; i < m; ++i) {
                double row = 0.0;
                for (int j = 0; j < m; ++j) row += l.kernel[i * m + j] * st.y[j];
                st.g[i] += row;
            }
        }
    }
}

double state_eval(const ChaosState& st) {
    KahanSum s;
    for (std::size_t i = 0; i < st.y.size(); ++i) s.add((st.c[i] + st.g[i]) * st.y[i]);
    return s.value();
}

}  // namespace

double eval_poisson_chaos(const PoissonChaosFunctional& F, std::span<const long> counts) {
    const int m = F.space.m();
    if (static_cast<int>(counts.size()) != m)
        throw contract_error("eval_poisson_chaos: dimension mismatch");
    std::vector<double> y;
    compensated(F.space, counts, y);
    KahanSum total;
    for (const auto& l : F.levels) {
        if (l.p == 1) {
            for (int i = 0; i < m; ++i) total.add(l.kernel[i] * y[i]);
        } else {
            for (int i = 0; i < m; ++i) {
                double row = 0.0;
                for (int j = 0; j < m; ++j) row += l.kernel[i * m + j] * y[j];
                total.add(row * y[i]);
            }
        }
    }
    return total.value();
}

double add_point_derivative(const std::function<double(std::span<const long>)>& f_eval,
                            std::span<const long> counts, int z) {
    if (z < 0 || z >= static_cast<int>(counts.size()))
        throw contract_error("add_point_derivative: cell out of range");
    std::vector<long> bumped(counts.begin(), counts.end());
    bumped[z] += 1;
    return f_eval(std::span<const long>(bumped)) - f_eval(counts);
}

double chaos_derivative(const PoissonChaosFunctional& F, std::span<const long> counts, int z) {
    const int m = F.space.m();
    std::vector<double> y;
    compensated(F.space, counts, y);
    double out = 0.0;
    for (const auto& l : F.levels) {
        if (l.p == 1) {
            out += l.kernel[z];
        } else {
            double row = 0.0;
            for (int j = 0; j < m; ++j) row += l.kernel[z * m + j] * y[j];
            out += 2.0 * row;
        }
    }
    return out;
}

double chaos_l_inverse_derivative(const PoissonChaosFunctional& F, std::span<const long> counts,
                                  int z) {
    const int m = F.space.m();
    std::vector<double> y;
    compensated(F.space, counts, y);
    double out = 0.0;
    for (const auto& l : F.levels) {
        if (l.p == 1) {
            out += l.kernel[z];
        } else {
            double row = 0.0;
            for (int j = 0; j < m; ++j) row += l.kernel[z * m + j] * y[j];
            out += row;  // (1/p) * p = 1
        }
    }
    return out;
}

double poisson_inner(const PoissonChaosFunctional& F, std::span<const long> counts) {
    ChaosState st;
    build_state(F, counts, st);
    KahanSum inner;
    for (int z = 0; z < F.space.m(); ++z)
        inner.add((st.c[z] + 2.0 * st.g[z]) * (st.c[z] + st.g[z]) * F.space.mu[z]);
    return inner.value();
}

double poisson_chaos_variance(const PoissonChaosFunctional& F) {
    const int m = F.space.m();
    KahanSum v;
    for (const auto& l : F.levels) {
        KahanSum norm2;
        if (l.p == 1) {
            for (int i = 0; i < m; ++i) norm2.add(l.kernel[i] * l.kernel[i] * F.space.mu[i]);
            v.add(norm2.value());
        } else {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    norm2.add(l.kernel[i * m + j] * l.kernel[i * m + j] * F.space.mu[i] *
                              F.space.mu[j]);
            v.add(2.0 * norm2.value());
        }
    }
    return v.value();
}

std::vector<double> sample_poisson_chaos(const PoissonChaosFunctional& F, std::size_t n_samples,
                                         std::uint64_t seed) {
    F.validate();
    std::vector<double> out(n_samples);
    const int m = F.space.m();
    parallel_chunks(n_samples, 4096, [&](std::size_t, std::size_t b, std::size_t e) {
        std::vector<long> counts(m);
        ChaosState st;
        for (std::size_t i = b; i < e; ++i) {
            Rng rng(seed, i);
            for (int j = 0; j < m; ++j) counts[j] = rng.poisson(F.space.mu[j]);
            build_state(F, std::span<const long>(counts), st);
            out[i] = state_eval(st);
        }
    });
    return out;
}

PoissonBoundReport poisson_gamma_bound(const PoissonChaosFunctional& F, double nu,
                                       std::size_t n_samples, std::uint64_t seed) {
    F.validate();
    if (!(nu > 0.0)) throw contract_error("poisson_gamma_bound: nu must be > 0");
    if (n_samples < 1000) throw contract_error("poisson_gamma_bound: too few samples");
    const int m = F.space.m();
    const int n_batches = 32;
    struct Acc {
        KahanSum abs_a, sq_a, cubic;
        std::size_t count = 0;
    };
    std::vector<Acc> batches(n_batches);
    const std::size_t chunk = (n_samples + n_batches - 1) / n_batches;
    parallel_chunks(n_samples, chunk, [&](std::size_t c, std::size_t b, std::size_t e) {
        Acc& acc = batches[c];
        std::vector<long> counts(m);
        ChaosState st;
        for (std::size_t i = b; i < e; ++i) {
            Rng rng(seed, i);
            for (int j = 0; j < m; ++j) counts[j] = rng.poisson(F.space.mu[j]);
            build_state(F, std::span<const long>(counts), st);
            const double f = state_eval(st);
            KahanSum inner, cub;
            for (int z = 0; z < m; ++z) {
                const double dz = st.c[z] + 2.0 * st.g[z];
                const double lz = st.c[z] + st.g[z];
                inner.add(dz * lz * F.space.mu[z]);
                cub.add(dz * dz * std::abs(lz) * F.space.mu[z]);
            }
            const double a = 2.0 * (f + nu) - inner.value();
            acc.abs_a.add(std::abs(a));
            acc.sq_a.add(a * a);
            acc.cubic.add(cub.value());
            ++acc.count;
        }
    });
    KahanSum abs_a, sq_a, cubic;
    for (const Acc& a : batches) {
        abs_a.add(a.abs_a.value());
        sq_a.add(a.sq_a.value());
        cubic.add(a.cubic.value());
    }
    const double l1 = abs_a.value() / n_samples;
    const double l2 = std::sqrt(sq_a.value() / n_samples);
    const double cub = cubic.value() / n_samples;

    PoissonBoundReport rep;
    const double cap1 = std::max(1.0, 2.0 / nu);
    const double cap2 = std::max(1.0, 1.0 / nu + 0.5);
    rep.first_term = cap1 * l1;
    rep.first_term_l2 = cap1 * l2;
    rep.second_term = cap2 * cub;
    rep.bound = rep.first_term + rep.second_term;
    rep.bound_l2 = rep.first_term_l2 + rep.second_term;

    auto batch_stderr = [&](auto member, double mean) {
        KahanSum dev;
        int used = 0;
        for (const Acc& b : batches) {
            if (b.count == 0) continue;
            const double bm = (b.*member).value() / b.count;
            dev.add((bm - mean) * (bm - mean));
            ++used;
        }
        return used > 1 ? std::sqrt(dev.value() / (used * (used - 1.0))) : 0.0;
    };
    rep.stderr_first = cap1 * batch_stderr(&Acc::abs_a, l1);
    rep.stderr_second = cap2 * batch_stderr(&Acc::cubic, cub);
    return rep;
}

IbpReport ibp_check(const PoissonChaosFunctional& F, const TestFunction& g,
                    std::size_t n_samples, std::uint64_t seed) {
    F.validate();
    if (!g.lip1) throw contract_error("ibp_check: g must declare lip1");
    const int m = F.space.m();
    const int n_batches = 32;
    struct Acc {
        KahanSum lhs, rhs, diff;
        std::size_t count = 0;
    };
    std::vector<Acc> batches(n_batches);
    const std::size_t chunk = (n_samples + n_batches - 1) / n_batches;
    parallel_chunks(n_samples, chunk, [&](std::size_t c, std::size_t b, std::size_t e) {
        Acc& acc = batches[c];
        std::vector<long> counts(m);
        ChaosState st;
        for (std::size_t i = b; i < e; ++i) {
            Rng rng(seed, i);
            for (int j = 0; j < m; ++j) counts[j] = rng.poisson(F.space.mu[j]);
            build_state(F, std::span<const long>(counts), st);
            const double f = state_eval(st);
            const double gf = g.eval(f);
            const double lhs = f * gf;
            // D_z g(F) = g(F_z) - g(F) with F_z = F + D_z F (add one point).
            KahanSum rhs;
            for (int z = 0; z < m; ++z) {
                const double dz = st.c[z] + 2.0 * st.g[z];
                const double dgz = g.eval(f + dz) - gf;
                rhs.add(dgz * (st.c[z] + st.g[z]) * F.space.mu[z]);
            }
            acc.lhs.add(lhs);
            acc.rhs.add(rhs.value());
            acc.diff.add(lhs - rhs.value());
            ++acc.count;
        }
    });
    IbpReport rep;
    KahanSum lhs, rhs;
    for (const Acc& a : batches) {
        lhs.add(a.lhs.value());
        rhs.add(a.rhs.value());
    }
    rep.lhs = lhs.value() / n_samples;
    rep.rhs = rhs.value() / n_samples;
    rep.diff = rep.lhs - rep.rhs;
    const double mean_diff = rep.diff;
    KahanSum dev;
    int used = 0;
    for (const Acc& a : batches) {
        if (a.count == 0) continue;
        const double bm = a.diff.value() / a.count;
        dev.add((bm - mean_diff) * (bm - mean_diff));
        ++used;
    }
    rep.pooled_stderr = used > 1 ? std::sqrt(dev.value() / (used * (used - 1.0))) : 0.0;
    return rep;
}

PoissonChaosFunctional poisson_indicator(const PoissonSpace& space, int cells_in_B,
                                         double coefficient) {
    space.validate();
    if (cells_in_B < 1 || cells_in_B > space.m())
        throw contract_error("poisson_indicator: bad cell count");
    PoissonChaosFunctional F;
    F.space = space;
    PoissonChaosFunctional::Level l;
    l.p = 1;
    l.kernel.assign(space.m(), 0.0);
    for (int i = 0; i < cells_in_B; ++i) l.kernel[i] = coefficient;
    F.levels.push_back(std::move(l));
    F.validate();
    return F;
}

PoissonChaosFunctional poisson_offdiag_constant(const PoissonSpace& space, double value) {
    space.validate();
    PoissonChaosFunctional F;
    F.space = space;
    const int m = space.m();
    PoissonChaosFunctional::Level l;
    l.p = 2;
    l.kernel.assign(static_cast<std::size_t>(m) * m, value);
    for (int i = 0; i < m; ++i) l.kernel[i * m + i] = 0.0;
    F.levels.push_back(std::move(l));
    F.validate();
    return F;
}

}  // namespace gstein
