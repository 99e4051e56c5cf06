#include "gstein/dejong.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "gstein/errors.hpp"
#include "gstein/parallel.hpp"
#include "gstein/rng.hpp"
#include "gstein/distances.hpp"
#include "gstein/stein_core.hpp"

namespace gstein {

namespace {

struct Strides {
    std::vector<std::size_t> stride;
    std::vector<std::size_t> size;
};

Strides make_strides(const DiscreteProductSpace& s) {
    Strides st;
    std::size_t acc = 1;
    for (int j = 0; j < s.n(); ++j) {
        st.stride.push_back(acc);
        st.size.push_back(s.factors[j].values.size());
        acc *= st.size.back();
    }
    return st;
}

// Everything the exact pipeline needs from one sweep over (x, alpha, v).
struct PairEnumeration {
    std::vector<double> w;         // W per outcome
    std::vector<double> prob;      // P(x)
    std::vector<double> cond_dw1;  // E[W'-W | X=x]
    std::vector<double> cond_dw2;  // E[(W'-W)^2 | X=x]
    double e_dw2 = 0.0, e_abs_dw3 = 0.0, e_dw4 = 0.0;
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
};

PairEnumeration enumerate_pair(const UStatKernel& k, const DiscreteProductSpace& s) {
    s.validate();
    s.require_within_cap("build_pair_stats(exact)");
    PairEnumeration pe;
    pe.w = eval_kernel_table(k, s);
    const std::size_t total = pe.w.size();
    const int n = s.n();
    const Strides st = make_strides(s);
    pe.prob.resize(total);
    pe.cond_dw1.assign(total, 0.0);
    pe.cond_dw2.assign(total, 0.0);

    const std::size_t chunk = 4096;
    const std::size_t n_chunks = (total + chunk - 1) / chunk;
    struct Acc {
        double dw2 = 0, adw3 = 0, dw4 = 0, m1 = 0, m2 = 0, m3 = 0, m4 = 0;
    };
    std::vector<Acc> partial(n_chunks);
    parallel_chunks(total, chunk, [&](std::size_t c, std::size_t b, std::size_t e) {
        KahanSum dw2, adw3, dw4, m1, m2, m3, m4;
        for (std::size_t flat = b; flat < e; ++flat) {
            const double p = outcome_probability(s, flat);
            pe.prob[flat] = p;
            const double wx = pe.w[flat];
            m1.add(p * wx);
            m2.add(p * wx * wx);
            m3.add(p * wx * wx * wx);
            m4.add(p * wx * wx * wx * wx);
            KahanSum c1, c2;
            for (int a = 0; a < n; ++a) {
                const std::size_t ia = (flat / st.stride[a]) % st.size[a];
                for (std::size_t v = 0; v < st.size[a]; ++v) {
                    if (v == ia) continue;  // dW = 0 contributes nothing
                    const double weight = s.factors[a].probs[v] / n;
                    const std::size_t flat2 = flat - ia * st.stride[a] + v * st.stride[a];
                    const double dw = pe.w[flat2] - wx;
                    c1.add(weight * dw);
                    c2.add(weight * dw * dw);
                    const double pw = p * weight;
                    dw2.add(pw * dw * dw);
                    adw3.add(pw * std::abs(dw * dw * dw));
                    dw4.add(pw * dw * dw * dw * dw);
                }
            }
            pe.cond_dw1[flat] = c1.value();
            pe.cond_dw2[flat] = c2.value();
        }
        partial[c] = {dw2.value(), adw3.value(), dw4.value(),
                      m1.value(),  m2.value(),   m3.value(),  m4.value()};
    });
    KahanSum dw2, adw3, dw4, m1, m2, m3, m4;
    for (const Acc& a : partial) {
        dw2.add(a.dw2);
        adw3.add(a.adw3);
        dw4.add(a.dw4);
        m1.add(a.m1);
        m2.add(a.m2);
        m3.add(a.m3);
        m4.add(a.m4);
    }
    pe.e_dw2 = dw2.value();
    pe.e_abs_dw3 = adw3.value();
    pe.e_dw4 = dw4.value();
    pe.m1 = m1.value();
    pe.m2 = m2.value();
    pe.m3 = m3.value();
    pe.m4 = m4.value();
    return pe;
}

// S(x) = (n / 2d) E[(W'-W)^2 | X=x] - 2 (W(x) + nu).
double s_value(const PairEnumeration& pe, std::size_t flat, int n, int d, double nu) {
    return pe.cond_dw2[flat] * n / (2.0 * d) - 2.0 * (pe.w[flat] + nu);
}

}  // namespace

ExchangeablePairStats build_pair_stats(const UStatKernel& k, const DiscreteProductSpace& s,
                                       int d, double nu, const PairMode& mode) {
    const int n = s.n();
    if (d < 1 || d > n) throw contract_error("build_pair_stats: bad degeneracy order");
    if (!(nu > 0.0)) throw contract_error("build_pair_stats: nu must be > 0");

    ExchangeablePairStats st;
    st.lambda_pair = static_cast<double>(d) / n;
    st.nu = nu;

    if (mode.exact) {
        const PairEnumeration pe = enumerate_pair(k, s);
        if (std::abs(pe.m2 - 2.0 * nu) > 1e-6 * std::max(1.0, 2.0 * nu))
            throw contract_error("build_pair_stats: declared nu disagrees with E[W^2]/2");
        st.m2 = pe.m2;
        st.m3 = pe.m3;
        st.m4 = pe.m4;
        st.e_dW2 = pe.e_dw2;
        st.e_abs_dW3 = pe.e_abs_dw3;
        st.e_dW4 = pe.e_dw4;
        KahanSum es, es2, eabs;
        double reg = 0.0;
        for (std::size_t flat = 0; flat < pe.w.size(); ++flat) {
            const double sv = s_value(pe, flat, n, d, nu);
            es.add(pe.prob[flat] * sv);
            es2.add(pe.prob[flat] * sv * sv);
            eabs.add(pe.prob[flat] * std::abs(sv));
            reg = std::max(reg, std::abs(pe.cond_dw1[flat] + st.lambda_pair * pe.w[flat]));
        }
        const double mean_s = es.value();
        st.e_S = mean_s;
        st.var_S = es2.value() - mean_s * mean_s;
        st.e_abs_S = eabs.value();
        st.e_abs_R = 0.0;
        st.r_zero = reg <= 1e-9 * std::max(1.0, std::abs(pe.m2));
        st.exact = true;
        return st;
    }

    if (mode.n_samples < 1000)
        throw contract_error("build_pair_stats: mc mode needs n_samples >= 1000");
    const std::size_t N = mode.n_samples;
    const int n_batches = 32;
    const Strides strides = make_strides(s);

    struct BatchAcc {
        KahanSum m2, m3, m4, dw2, adw3, dw4, sv, sv2, sabs;
        std::size_t count = 0;
    };
    std::vector<BatchAcc> batches(n_batches);
    const std::size_t chunk = (N + n_batches - 1) / n_batches;
    parallel_chunks(N, chunk, [&](std::size_t c, std::size_t b, std::size_t e) {
        BatchAcc& acc = batches[c];
        std::vector<double> atoms(n);
        std::vector<std::size_t> idx(n);
        for (std::size_t i = b; i < e; ++i) {
            Rng rng(mode.seed, i);
            for (int j = 0; j < n; ++j) {
                double u = rng.uniform();
                std::size_t ij = 0;
                double accp = s.factors[j].probs[0];
                while (u > accp && ij + 1 < strides.size[j]) {
                    ++ij;
                    accp += s.factors[j].probs[ij];
                }
                idx[j] = ij;
                atoms[j] = s.factors[j].values[ij];
            }
            const double wx = k.psi(std::span<const double>(atoms));
            acc.m2.add(wx * wx);
            acc.m3.add(wx * wx * wx);
            acc.m4.add(wx * wx * wx * wx);
            // Exact inner conditional over (alpha, v) given x.
            KahanSum c2;
            for (int a = 0; a < n; ++a) {
                const double keep = atoms[a];
                for (std::size_t v = 0; v < strides.size[a]; ++v) {
                    if (v == idx[a]) continue;
                    atoms[a] = s.factors[a].values[v];
                    const double dw = k.psi(std::span<const double>(atoms)) - wx;
                    const double weight = s.factors[a].probs[v] / n;
                    c2.add(weight * dw * dw);
                    acc.dw2.add(weight * dw * dw);
                    acc.adw3.add(weight * std::abs(dw * dw * dw));
                    acc.dw4.add(weight * dw * dw * dw * dw);
                }
                atoms[a] = keep;
            }
            const double sv = c2.value() * n / (2.0 * d) - 2.0 * (wx + nu);
            acc.sv.add(sv);
            acc.sv2.add(sv * sv);
            acc.sabs.add(std::abs(sv));
            ++acc.count;
        }
    });

    auto combine = [&](auto member) {
        KahanSum total;
        for (const BatchAcc& b : batches) total.add((b.*member).value());
        return total.value() / N;
    };
    st.m2 = combine(&BatchAcc::m2);
    st.m3 = combine(&BatchAcc::m3);
    st.m4 = combine(&BatchAcc::m4);
    st.e_dW2 = combine(&BatchAcc::dw2);
    st.e_abs_dW3 = combine(&BatchAcc::adw3);
    st.e_dW4 = combine(&BatchAcc::dw4);
    const double mean_s = combine(&BatchAcc::sv);
    st.e_S = mean_s;
    st.var_S = combine(&BatchAcc::sv2) - mean_s * mean_s;
    st.e_abs_S = combine(&BatchAcc::sabs);
    st.r_zero = true;  // structural for the replacement coupling
    st.exact = false;

    // Batch-means standard errors.
    auto batch_stderr = [&](auto member, double mean) {
        KahanSum dev;
        int used = 0;
        for (const BatchAcc& b : batches) {
            if (b.count == 0) continue;
            const double bm = (b.*member).value() / b.count;
            dev.add((bm - mean) * (bm - mean));
            ++used;
        }
        return used > 1 ? std::sqrt(dev.value() / (used * (used - 1.0))) : 0.0;
    };
    st.stderrs["m2"] = batch_stderr(&BatchAcc::m2, st.m2);
    st.stderrs["e_abs_dW3"] = batch_stderr(&BatchAcc::adw3, st.e_abs_dW3);
    st.stderrs["e_dW4"] = batch_stderr(&BatchAcc::dw4, st.e_dW4);
    st.stderrs["e_abs_S"] = batch_stderr(&BatchAcc::sabs, st.e_abs_S);
    return st;
}

double regression_residual(const UStatKernel& k, const DiscreteProductSpace& s, int d) {
    const PairEnumeration pe = enumerate_pair(k, s);
    const double lambda = static_cast<double>(d) / s.n();
    double worst = 0.0;
    for (std::size_t flat = 0; flat < pe.w.size(); ++flat)
        worst = std::max(worst, std::abs(pe.cond_dw1[flat] + lambda * pe.w[flat]));
    return worst;
}

SDecomposition hoeffding_S_decomposition(const UStatKernel& k, const DiscreteProductSpace& s,
                                         int d, double nu) {
    const int n = s.n();
    s.require_within_cap("hoeffding_S_decomposition");
    const PairEnumeration pe = enumerate_pair(k, s);
    SDecomposition out;
    out.ew3 = pe.m3;

    // Components of W (order d) and the full decomposition of W^2.
    OrderComponents wd = order_d_components(k, s, d);
    UStatKernel k2;
    auto base = k.psi;
    k2.psi = [base](std::span<const double> x) {
        const double v = base(x);
        return v * v;
    };
    HoeffdingDecomposition full2 = hoeffding_decompose(k2, s);
    out.u_empty = full2.mean;

    KahanSum var_s1;
    KahanSum var_s2;
    KahanSum sum_var_uj;
    KahanSum ew3_cov;
    for (const auto& [mask, table] : full2.components) {
        const int bits = std::popcount(mask);
        if (bits > 2 * d - 1) continue;
        const double a = 1.0 - bits / (2.0 * d);
        if (bits >= 1 && bits != d) var_s1.add(a * a * full2.sigma2.at(mask));
        if (bits == d) {
            sum_var_uj.add(full2.sigma2.at(mask));
            // Var(U_J - 4 W_J) over the shared coordinate table.
            const ComponentTable& uj = table;
            const ComponentTable& wj = wd.components.at(mask);
            KahanSum v;
            KahanSum cov;
            for (std::size_t cell = 0; cell < uj.values.size(); ++cell) {
                double p = 1.0;
                std::size_t c = cell;
                for (int j : uj.coords) {
                    const std::size_t m = s.factors[j].values.size();
                    p *= s.factors[j].probs[c % m];
                    c /= m;
                }
                const double diff = uj.values[cell] - 4.0 * wj.values[cell];
                v.add(p * diff * diff);
                cov.add(p * uj.values[cell] * wj.values[cell]);
            }
            var_s2.add(v.value());
            ew3_cov.add(cov.value());
        }
    }
    out.var_S1 = var_s1.value();
    out.var_S2 = var_s2.value();
    out.var_S_total = out.var_S1 + 0.25 * out.var_S2;
    out.ew3_from_cov = ew3_cov.value();
    out.var_s2_identity = sum_var_uj.value() + 32.0 * nu - 8.0 * pe.m3;

    KahanSum es, es2;
    for (std::size_t flat = 0; flat < pe.w.size(); ++flat) {
        const double sv = s_value(pe, flat, n, d, nu);
        es.add(pe.prob[flat] * sv);
        es2.add(pe.prob[flat] * sv * sv);
    }
    out.var_S_direct = es2.value() - es.value() * es.value();
    return out;
}

MomentIdentityReport moment_identities_check(const UStatKernel& k,
                                             const DiscreteProductSpace& s, int d) {
    const int n = s.n();
    const PairEnumeration pe = enumerate_pair(k, s);
    const double inv2l = n / (2.0 * d);
    MomentIdentityReport rep;
    KahanSum w2c, w1c;
    for (std::size_t flat = 0; flat < pe.w.size(); ++flat) {
        const double cond = inv2l * pe.cond_dw2[flat];
        w2c.add(pe.prob[flat] * pe.w[flat] * pe.w[flat] * cond);
        w1c.add(pe.prob[flat] * pe.w[flat] * cond);
    }
    rep.m4_lhs = pe.m4;
    rep.m4_rhs = 3.0 * w2c.value() - 0.5 * inv2l * pe.e_dw4;
    rep.m3_lhs = pe.m3;
    rep.m3_rhs = 2.0 * w1c.value();
    rep.worst_abs_dev =
        std::max(std::abs(rep.m4_lhs - rep.m4_rhs), std::abs(rep.m3_lhs - rep.m3_rhs));
    return rep;
}

DeJongBound dejong_bound(const UStatKernel& k, const DiscreteProductSpace& s, int d, double nu,
                         const CdPolicy& policy) {
    const int n = s.n();
    const ExchangeablePairStats st = build_pair_stats(k, s, d, nu);

    // Order-d component statistics (degeneracy certified by reconstruction).
    OrderComponents oc = order_d_components(k, s, d);
    if (oc.reconstruction_error > 1e-9)
        throw contract_error("dejong_bound: kernel is not degenerate of the declared order");
    double rho2 = 0.0, bigD = 0.0;
    {
        std::vector<double> per_coord(n, 0.0);
        bool any = false;
        for (const auto& [mask, s2] : oc.sigma2) {
            for (int j = 0; j < n; ++j)
                if (mask >> j & 1) per_coord[j] += s2;
            if (s2 > 0.0) {
                any = true;
                const ComponentTable& t = oc.components.at(mask);
                KahanSum m4;
                for (std::size_t cell = 0; cell < t.values.size(); ++cell) {
                    double p = 1.0;
                    std::size_t c = cell;
                    for (int j : t.coords) {
                        const std::size_t m = s.factors[j].values.size();
                        p *= s.factors[j].probs[c % m];
                        c /= m;
                    }
                    const double v2 = t.values[cell] * t.values[cell];
                    m4.add(p * v2 * v2);
                }
                bigD = std::max(bigD, m4.value() / (s2 * s2));
            }
        }
        if (!any) throw contract_error("dejong_bound: all order-d components vanish");
        for (double v : per_coord) rho2 = std::max(rho2, v);
    }

    // Exact (t22) quadruple sum: sum_i (sum_{J ∋ i} sigma_J)^4.
    double quad_sum = 0.0;
    {
        std::vector<double> si(n, 0.0);
        for (const auto& [mask, s2] : oc.sigma2) {
            const double sd = std::sqrt(std::max(0.0, s2));
            for (int j = 0; j < n; ++j)
                if (mask >> j & 1) si[j] += sd;
        }
        KahanSum q;
        for (double v : si) q.add(v * v * v * v);
        quad_sum = q.value();
    }

    DeJongBound out;
    out.rho2 = rho2;
    out.bigD = bigD;
    out.quad_sum = quad_sum;
    out.moment_functional = st.m4 - 12.0 * st.m3 - 12.0 * nu * nu + 48.0 * nu;
    const double cap = std::max(1.0, 2.0 / nu);
    out.moment_term = cap / std::sqrt(3.0) * std::sqrt(std::abs(out.moment_functional));

    const double coeff =
        ((2.0 * std::sqrt(3.0) + 4.0 * std::sqrt(nu)) * cap + 4.0 * std::sqrt(nu)) /
        (12.0 * std::sqrt(static_cast<double>(d)));
    // B generalizes 16 C_d D rho^2 = an upper bound for n E[(W'-W)^4].
    double B = 0.0;
    switch (policy.mode) {
        case CdPolicy::Mode::exact_quadsum:
            B = 16.0 * bigD * quad_sum;
            break;
        case CdPolicy::Mode::user_constant:
            B = 16.0 * policy.c_d * bigD * rho2;
            break;
        case CdPolicy::Mode::require:
            throw config_error("dejong_bound: C_d required but not supplied");
    }
    out.rho_term = coeff * std::sqrt(B);
    out.total = out.moment_term + out.rho_term;
    out.total_without_D = out.moment_term +
                          coeff * std::sqrt(policy.mode == CdPolicy::Mode::user_constant
                                                ? 16.0 * policy.c_d * rho2
                                                : 16.0 * quad_sum);

    out.rho_term_pair4 = coeff * std::sqrt(n * st.e_dW4);
    out.total_pair4 = out.moment_term + out.rho_term_pair4;

    const PluginBound pb = plugin_bound(st, nu, 1.0, 1.0);
    out.exact_variant_total = pb.with_var_s;
    return out;
}

KernelInstance rademacher_quadratic(int n) {
    if (n < 2) throw contract_error("rademacher_quadratic: n must be >= 2");
    KernelInstance inst;
    inst.name = "rademacher-quadratic";
    inst.space = rademacher_space(n);
    inst.d = 2;
    inst.nu = 1.0;
    const double c = 2.0 / std::sqrt(static_cast<double>(n) * (n - 1));
    inst.kernel.psi = [c, n](std::span<const double> x) {
        // sum_{i<j} x_i x_j = ((sum x)^2 - sum x^2) / 2.
        double sum = 0.0, sq = 0.0;
        for (int i = 0; i < n; ++i) {
            sum += x[i];
            sq += x[i] * x[i];
        }
        return c * 0.5 * (sum * sum - sq);
    };
    inst.kernel.declared_order = 2;
    return inst;
}

KernelInstance multilinear_form(int n, int d, double nu, std::uint64_t seed) {
    if (d < 1 || d > n) throw contract_error("multilinear_form: bad degree");
    KernelInstance inst;
    inst.name = "multilinear";
    inst.space = rademacher_space(n);
    inst.d = d;
    inst.nu = nu;
    // Seeded coefficients over all d-subsets, normalized so sum a_J^2 = 2 nu.
    std::vector<std::uint64_t> masks;
    for (std::uint64_t m = 0; m < (1ull << n); ++m)
        if (std::popcount(m) == d) masks.push_back(m);
    Rng rng(seed, 0x6d6c666f);
    std::vector<double> coef(masks.size());
    double norm = 0.0;
    for (auto& c : coef) {
        c = 2.0 * rng.uniform() - 1.0;
        norm += c * c;
    }
    const double scale = std::sqrt(2.0 * nu / norm);
    for (auto& c : coef) c *= scale;
    const int nn = n;
    inst.kernel.psi = [masks, coef, nn](std::span<const double> x) {
        KahanSum sum;
        for (std::size_t i = 0; i < masks.size(); ++i) {
            double prod = coef[i];
            for (int j = 0; j < nn; ++j)
                if (masks[i] >> j & 1) prod *= x[j];
            sum.add(prod);
        }
        return sum.value();
    };
    inst.kernel.declared_order = d;
    return inst;
}

KernelInstance family_by_name(const std::string& name, int n, double nu, std::uint64_t seed) {
    if (name == "rademacher-quadratic") {
        if (std::abs(nu - 1.0) > 1e-12)
            throw config_error("rademacher-quadratic has nu = 1 by construction");
        return rademacher_quadratic(n);
    }
    if (name == "multilinear" || name == "multilinear-2") return multilinear_form(n, 2, nu, seed);
    if (name == "multilinear-3") return multilinear_form(n, 3, nu, seed);
    throw config_error("unknown kernel family: " + name);
}

std::vector<double> sample_kernel(const UStatKernel& k, const DiscreteProductSpace& s,
                                  std::size_t n_samples, std::uint64_t seed) {
    const int n = s.n();
    std::vector<double> out(n_samples);
    parallel_chunks(n_samples, 8192, [&](std::size_t, std::size_t b, std::size_t e) {
        std::vector<double> atoms(n);
        for (std::size_t i = b; i < e; ++i) {
            Rng rng(seed, i);
            for (int j = 0; j < n; ++j) {
                double u = rng.uniform();
                std::size_t ij = 0;
                double acc = s.factors[j].probs[0];
                while (u > acc && ij + 1 < s.factors[j].values.size()) {
                    ++ij;
                    acc += s.factors[j].probs[ij];
                }
                atoms[j] = s.factors[j].values[ij];
            }
            out[i] = k.psi(std::span<const double>(atoms));
        }
    });
    return out;
}

std::vector<JointEntry> joint_pair_table(const UStatKernel& k, const DiscreteProductSpace& s) {
    s.require_within_cap("joint_pair_table");
    const std::vector<double> w = eval_kernel_table(k, s);
    const int n = s.n();
    const Strides st = make_strides(s);
    std::vector<JointEntry> out;
    for (std::size_t flat = 0; flat < w.size(); ++flat) {
        const double p = outcome_probability(s, flat);
        for (int a = 0; a < n; ++a) {
            const std::size_t ia = (flat / st.stride[a]) % st.size[a];
            for (std::size_t v = 0; v < st.size[a]; ++v) {
                const double weight = p * s.factors[a].probs[v] / n;
                const std::size_t flat2 = flat - ia * st.stride[a] + v * st.stride[a];
                out.push_back({w[flat], w[flat2], weight});
            }
        }
    }
    return out;
}

std::vector<DemoRow> demo_sequence(const std::string& family, const std::vector<int>& n_list,
                                   double nu, const DemoOptions& opt) {
    std::vector<DemoRow> rows;
    const auto dict = d2_dictionary();
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
        const int n = n_list[ni];
        KernelInstance inst = family_by_name(family, n, nu, opt.seed + ni);
        DemoRow row;
        row.n = n;
        if (inst.space.total_points() > inst.space.cap) {
            // MC fallback for out-of-cap sizes.
            row.exact = false;
            PairMode mode;
            mode.exact = false;
            mode.seed = opt.seed + 1000 + ni;
            mode.n_samples = std::max<std::size_t>(opt.n_samples, 1000);
            ExchangeablePairStats st = build_pair_stats(inst.kernel, inst.space, inst.d, nu, mode);
            row.moment_discrepancy =
                std::abs(st.m4 - 12.0 * st.m3 - 12.0 * nu * nu + 48.0 * nu);
            const PluginBound pb = plugin_bound(st, nu, 1.0, 1.0);
            row.exact_variant = pb.with_var_s;
            const double cap = std::max(1.0, 2.0 / nu);
            const double coeff =
                ((2.0 * std::sqrt(3.0) + 4.0 * std::sqrt(nu)) * cap + 4.0 * std::sqrt(nu)) /
                (12.0 * std::sqrt(static_cast<double>(inst.d)));
            row.bound = cap / std::sqrt(3.0) * std::sqrt(row.moment_discrepancy) +
                        coeff * std::sqrt(n * st.e_dW4);
        } else {
            DeJongBound b = dejong_bound(inst.kernel, inst.space, inst.d, nu);
            row.moment_discrepancy = std::abs(b.moment_functional);
            row.rho2 = b.rho2;
            row.bigD = b.bigD;
            row.bound = b.total_pair4;
            row.exact_variant = b.exact_variant_total;
        }
        auto ws = sample_kernel(inst.kernel, inst.space, opt.n_samples, opt.seed + 7700 + ni);
        row.emp_d2 =
            d2_dictionary_vs_centered_gamma(ws, CenteredGammaParams(nu), dict).value;
        auto zs = sample_centered_gamma(nu, opt.n_samples, opt.seed + 8800 + ni);
        row.emp_d1 = wasserstein1(ws, zs).value;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace gstein
