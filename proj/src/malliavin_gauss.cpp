#include "gstein/malliavin_gauss.hpp"

#include <algorithm>
#include <cmath>

#include "gstein/errors.hpp"
#include "gstein/parallel.hpp"
#include "gstein/rng.hpp"

namespace gstein {

void GaussChaosFunctional::validate() const {
    if (dim < 1) throw contract_error("GaussChaosFunctional: dim must be >= 1");
    if (levels.empty()) throw contract_error("GaussChaosFunctional: no chaos levels");
    bool any_nonzero = false;
    for (const Level& l : levels) {
        if (l.p != 1 && l.p != 2)
            throw contract_error("GaussChaosFunctional: order must be 1 or 2");
        const std::size_t want = l.p == 1 ? dim : static_cast<std::size_t>(dim) * dim;
        if (l.kernel.size() != want)
            throw contract_error("GaussChaosFunctional: kernel size mismatch");
        for (double v : l.kernel) any_nonzero = any_nonzero || v != 0.0;
        if (l.p == 2) {
            for (int i = 0; i < dim; ++i)
                for (int j = i + 1; j < dim; ++j)
                    if (std::abs(l.kernel[i * dim + j] - l.kernel[j * dim + i]) > 1e-14)
                        throw contract_error("GaussChaosFunctional: kernel must be symmetric");
        }
    }
    if (!any_nonzero) throw contract_error("GaussChaosFunctional: all kernels vanish");
}

bool GaussChaosFunctional::pure_order(int p) const {
    return levels.size() == 1 && levels[0].p == p;
}

GaussChaosFunctional gauss_identity_nu(int nu_coords, int dim) {
    if (nu_coords < 1) throw contract_error("gauss_identity_nu: need nu >= 1 coordinates");
    GaussChaosFunctional F;
    F.dim = dim > 0 ? dim : nu_coords;
    if (F.dim < nu_coords) throw contract_error("gauss_identity_nu: dim < nu");
    GaussChaosFunctional::Level l;
    l.p = 2;
    l.kernel.assign(static_cast<std::size_t>(F.dim) * F.dim, 0.0);
    for (int i = 0; i < nu_coords; ++i) l.kernel[i * F.dim + i] = 1.0;
    F.levels.push_back(std::move(l));
    F.validate();
    return F;
}

GaussChaosFunctional gauss_perturbed(int nu_coords, double eps, int dim) {
    GaussChaosFunctional F = gauss_identity_nu(nu_coords, dim);
    auto& ker = F.levels[0].kernel;
    for (int i = 0; i < F.dim; ++i)
        for (int j = 0; j < F.dim; ++j)
            if (i != j) ker[i * F.dim + j] += eps;
    F.validate();
    return F;
}

GaussChaosFunctional gauss_from_eigenvalues(const std::vector<double>& eigs) {
    if (eigs.empty()) throw contract_error("gauss_from_eigenvalues: empty list");
    GaussChaosFunctional F;
    F.dim = static_cast<int>(eigs.size());
    GaussChaosFunctional::Level l;
    l.p = 2;
    l.kernel.assign(static_cast<std::size_t>(F.dim) * F.dim, 0.0);
    for (int i = 0; i < F.dim; ++i) l.kernel[i * F.dim + i] = eigs[i];
    F.levels.push_back(std::move(l));
    F.validate();
    return F;
}

double eval_chaos(const GaussChaosFunctional& F, std::span<const double> x) {
    if (static_cast<int>(x.size()) != F.dim)
        throw contract_error("eval_chaos: dimension mismatch");
    KahanSum total;
    for (const auto& l : F.levels) {
        if (l.p == 1) {
            for (int i = 0; i < F.dim; ++i) total.add(l.kernel[i] * x[i]);
        } else {
            for (int i = 0; i < F.dim; ++i) {
                for (int j = 0; j < F.dim; ++j) {
                    const double f = l.kernel[i * F.dim + j];
                    if (f == 0.0) continue;
                    total.add(f * (x[i] * x[j] - (i == j ? 1.0 : 0.0)));
                }
            }
        }
    }
    return total.value();
}

namespace {

// D_i for one level at x.
void level_gradient(const GaussChaosFunctional& F, const GaussChaosFunctional::Level& l,
                    std::span<const double> x, std::vector<double>& out) {
    out.assign(F.dim, 0.0);
    if (l.p == 1) {
        for (int i = 0; i < F.dim; ++i) out[i] = l.kernel[i];
    } else {
        for (int i = 0; i < F.dim; ++i) {
            double s = 0.0;
            for (int j = 0; j < F.dim; ++j) s += l.kernel[i * F.dim + j] * x[j];
            out[i] = 2.0 * s;
        }
    }
}

}  // namespace

double malliavin_inner(const GaussChaosFunctional& F, std::span<const double> x) {
    if (static_cast<int>(x.size()) != F.dim)
        throw contract_error("malliavin_inner: dimension mismatch");
    std::vector<double> df(F.dim, 0.0), dl(F.dim, 0.0), tmp;
    for (const auto& l : F.levels) {
        level_gradient(F, l, x, tmp);
        for (int i = 0; i < F.dim; ++i) {
            df[i] += tmp[i];
            dl[i] += tmp[i] / l.p;  // -D L^{-1} carries the 1/p grading
        }
    }
    KahanSum inner;
    for (int i = 0; i < F.dim; ++i) inner.add(df[i] * dl[i]);
    return inner.value();
}

double chaos_variance(const GaussChaosFunctional& F) {
    KahanSum v;
    for (const auto& l : F.levels) {
        KahanSum norm2;
        for (double f : l.kernel) norm2.add(f * f);
        v.add((l.p == 1 ? 1.0 : 2.0) * norm2.value());
    }
    return v.value();
}

std::vector<double> sample_chaos(const GaussChaosFunctional& F, std::size_t n_samples,
                                 std::uint64_t seed) {
    F.validate();
    std::vector<double> out(n_samples);
    parallel_chunks(n_samples, 8192, [&](std::size_t, std::size_t b, std::size_t e) {
        std::vector<double> x(F.dim);
        for (std::size_t i = b; i < e; ++i) {
            Rng rng(seed, i);
            for (int j = 0; j < F.dim; ++j) x[j] = rng.normal();
            out[i] = eval_chaos(F, x);
        }
    });
    return out;
}

namespace {

struct McMoments {
    double l1 = 0.0, l2sq = 0.0, stderr_l1 = 0.0;
};

// Batch-means MC for A = 2(F + nu) - <DF, -DL^{-1}F>.
McMoments integrand_moments(const GaussChaosFunctional& F, double nu, std::size_t n_samples,
                            std::uint64_t seed) {
    F.validate();
    const int n_batches = 32;
    std::vector<KahanSum> abs_acc(n_batches), sq_acc(n_batches);
    std::vector<std::size_t> counts(n_batches, 0);
    const std::size_t chunk = (n_samples + n_batches - 1) / n_batches;
    parallel_chunks(n_samples, chunk, [&](std::size_t c, std::size_t b, std::size_t e) {
        std::vector<double> x(F.dim);
        for (std::size_t i = b; i < e; ++i) {
            Rng rng(seed, i);
            for (int j = 0; j < F.dim; ++j) x[j] = rng.normal();
            const double a =
                2.0 * (eval_chaos(F, x) + nu) - malliavin_inner(F, x);
            abs_acc[c].add(std::abs(a));
            sq_acc[c].add(a * a);
            ++counts[c];
        }
    });
    McMoments m;
    KahanSum l1, l2;
    for (int c = 0; c < n_batches; ++c) {
        l1.add(abs_acc[c].value());
        l2.add(sq_acc[c].value());
    }
    m.l1 = l1.value() / n_samples;
    m.l2sq = l2.value() / n_samples;
    KahanSum dev;
    int used = 0;
    for (int c = 0; c < n_batches; ++c) {
        if (counts[c] == 0) continue;
        const double bm = abs_acc[c].value() / counts[c];
        dev.add((bm - m.l1) * (bm - m.l1));
        ++used;
    }
    m.stderr_l1 = used > 1 ? std::sqrt(dev.value() / (used * (used - 1.0))) : 0.0;
    return m;
}

}  // namespace

GaussBoundResult gauss_gamma_bound(const GaussChaosFunctional& F, double nu,
                                   std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 10000)
        throw contract_error("gauss_gamma_bound: n_samples must be >= 10^4");
    if (!(nu > 0.0)) throw contract_error("gauss_gamma_bound: nu must be > 0");
    const McMoments m = integrand_moments(F, nu, n_samples, seed);
    GaussBoundResult out;
    out.l1_term = m.l1;
    out.l2_term = std::sqrt(m.l2sq);
    const double cap = std::max(1.0, 2.0 / nu);
    out.bound = cap * out.l1_term;
    out.bound_l2 = cap * out.l2_term;
    out.stderr_ = cap * m.stderr_l1;
    return out;
}

std::vector<double> sar_condition_trend(const std::vector<GaussChaosFunctional>& seq, double nu,
                                        std::size_t n_samples, std::uint64_t seed) {
    std::vector<double> out;
    out.reserve(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i)
        out.push_back(integrand_moments(seq[i], nu, n_samples, seed + i).l1);
    return out;
}

double conditional_l1_diagnostic(const GaussChaosFunctional& F, double nu,
                                 std::size_t n_samples, std::uint64_t seed, int bins) {
    F.validate();
    if (bins < 2) throw contract_error("conditional_l1_diagnostic: bins must be >= 2");
    // First pass: range of F; second pass: binned conditional means of A.
    std::vector<double> fs(n_samples), as(n_samples);
    parallel_chunks(n_samples, 8192, [&](std::size_t, std::size_t b, std::size_t e) {
        std::vector<double> x(F.dim);
        for (std::size_t i = b; i < e; ++i) {
            Rng rng(seed, i);
            for (int j = 0; j < F.dim; ++j) x[j] = rng.normal();
            fs[i] = eval_chaos(F, x);
            as[i] = 2.0 * (fs[i] + nu) - malliavin_inner(F, x);
        }
    });
    const auto [lo_it, hi_it] = std::minmax_element(fs.begin(), fs.end());
    const double lo = *lo_it, hi = *hi_it;
    const double width = (hi - lo) / bins;
    if (width <= 0.0) return std::abs(as[0]);
    std::vector<KahanSum> sums(bins);
    std::vector<std::size_t> counts(bins, 0);
    for (std::size_t i = 0; i < n_samples; ++i) {
        int b = std::min(bins - 1, static_cast<int>((fs[i] - lo) / width));
        sums[b].add(as[i]);
        ++counts[b];
    }
    KahanSum l1;
    for (int b = 0; b < bins; ++b)
        if (counts[b] > 0) l1.add(std::abs(sums[b].value()));
    return l1.value() / n_samples;
}

}  // namespace gstein
