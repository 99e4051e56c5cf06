// Acceptance suite: every criterion runs at its stated tolerance and prints
// one pass/fail line. The process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

#include "gstein/dejong.hpp"
#include "gstein/distances.hpp"
#include "gstein/gamma_dist.hpp"
#include "gstein/hoeffding.hpp"
#include "gstein/io.hpp"
#include "gstein/malliavin_gauss.hpp"
#include "gstein/malliavin_poisson.hpp"
#include "gstein/parallel.hpp"
#include "gstein/rng.hpp"
#include "gstein/stein_core.hpp"
#include "support/degenerate_kernels.hpp"

using namespace gstein;
using gstein::testsupport::seeded_degenerate_kernel;

namespace {

struct Criterion {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<SteinTarget> acceptance_targets() {
    std::vector<SteinTarget> targets;
    for (double r : {0.3, 0.5, 1.0, 2.0, 5.0})
        for (double lam : {0.5, 1.0, 2.0}) targets.emplace_back(GammaParams(r, lam));
    for (double nu : {0.5, 1.0, 2.0, 7.0}) targets.emplace_back(CenteredGammaParams(nu));
    return targets;
}

// ---- C1: Stein residual suite ------------------------------------------
Criterion c1_residuals() {
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();
    CertGrid grid;
    grid.per_side = 120;
    const auto dict = certification_dictionary();
    double worst = 0.0;
    std::string worst_at;
    for (const SteinTarget& tg : acceptance_targets()) {
        for (const TestFunction& h : dict) {
            SteinSolution sol = solve_stein(h, tg);
            ResidualStats st = residual_stats(sol, grid);
            if (st.max_abs > worst) {
                worst = st.max_abs;
                worst_at = h.name;
            }
        }
    }
    const double elapsed = seconds_since(t0);
    c.require(worst < 1e-7, "max residual " + std::to_string(worst) + " at " + worst_at);
    c.require(elapsed < 120.0, "runtime " + std::to_string(elapsed) + "s >= 2min");
    c.detail = "max residual " + io::format_double(worst) + ", " +
               std::to_string(elapsed).substr(0, 5) + "s";
    return c;
}

// ---- C2: bound certification -------------------------------------------
Criterion c2_bounds() {
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();
    CertGrid grid;
    grid.per_side = 120;
    int violations = 0;
    double worst_margin = 1e300;
    for (const SteinTarget& tg : acceptance_targets()) {
        for (const TestFunction& h : certification_dictionary()) {
            BoundReport rep = certify_bounds(h, tg, grid);
            if (!rep.pass) ++violations;
            for (const auto& [name, m] : rep.margin) worst_margin = std::min(worst_margin, m);
        }
    }
    const double elapsed = seconds_since(t0);
    c.require(violations == 0, std::to_string(violations) + " violations");
    c.require(elapsed < 300.0, "runtime " + std::to_string(elapsed) + "s >= 5min");
    c.detail = "0 violations, tightest margin " + io::format_double(worst_margin) + ", " +
               std::to_string(elapsed).substr(0, 5) + "s";
    return c;
}

// ---- C3: explosion lower bound -----------------------------------------
Criterion c3_explosion() {
    Criterion c;
    for (double r : {0.05, 0.1, 0.5, 1.0, 2.0}) {
        const double witness = explosion_witness(r);
        const double floor = std::exp(-0.5) / r;
        c.require(witness >= floor - 1e-8,
                  "r=" + std::to_string(r) + ": " + std::to_string(witness) + " < " +
                      std::to_string(floor));
    }
    c.detail = "witness >= e^{-1/2}/r for r in {0.05,0.1,0.5,1,2}";
    return c;
}

// ---- C4: centered moment identity --------------------------------------
Criterion c4_moment_identity() {
    Criterion c;
    for (double nu : {0.5, 1.0, 2.0, 7.0, 31.0}) {
        const double m3 = centered_gamma_moment(nu, 3);
        const double m4 = centered_gamma_moment(nu, 4);
        const double lhs = m4 - 12.0 * m3 - 12.0 * nu * nu + 48.0 * nu;
        const double scale = std::max({std::abs(m4), 12.0 * std::abs(m3), 12.0 * nu * nu});
        c.require(std::abs(lhs) <= 1e-9 * scale,
                  "nu=" + std::to_string(nu) + ": " + std::to_string(lhs / scale));
    }
    c.detail = "fourth-moment identity to 1e-9 relative for nu in {0.5,1,2,7,31}";
    return c;
}

// ---- C5: Hoeffding oracle equivalence -----------------------------------
Criterion c5_hoeffding_oracle() {
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        Rng rng(seed, 77);
        const int n = 3 + static_cast<int>(rng.next_u64() % 4);  // 3..6
        auto space = testsupport::seeded_space(rng, n, 3);
        // Random value-based kernel.
        std::vector<double> a(n), b(n * n);
        for (auto& v : a) v = 2.0 * rng.uniform() - 1.0;
        for (auto& v : b) v = 2.0 * rng.uniform() - 1.0;
        UStatKernel k;
        k.psi = [n, a, b](std::span<const double> x) {
            double v = 0.0;
            for (int i = 0; i < n; ++i) {
                v += a[i] * x[i];
                for (int j = i + 1; j < n; ++j) v += b[i * n + j] * x[i] * x[j];
            }
            return v;
        };

        auto dec = hoeffding_decompose(k, space);
        const auto w = eval_kernel_table(k, space);

        // Sequential-projection oracle components (increasing subset size).
        std::vector<std::uint64_t> masks;
        for (std::uint64_t m = 0; m < (1ull << n); ++m) masks.push_back(m);
        std::sort(masks.begin(), masks.end(), [](std::uint64_t x, std::uint64_t y) {
            const int px = std::popcount(x), py = std::popcount(y);
            return px != py ? px < py : x < y;
        });
        std::map<std::uint64_t, std::vector<double>> oracle;
        for (std::uint64_t J : masks) {
            ComponentTable ce = conditional_expectation(k, space, J);
            std::vector<double> vals(w.size());
            for (std::size_t flat = 0; flat < w.size(); ++flat) {
                double v = table_value_at(ce, space, flat);
                for (const auto& [L, prev] : oracle)
                    if ((L & J) == L && L != J) v -= prev[flat];
                vals[flat] = v;
            }
            oracle[J] = std::move(vals);
        }

        for (std::size_t flat = 0; flat < w.size(); ++flat) {
            double sum = dec.mean;
            for (const auto& [mask, t] : dec.components) {
                const double v = table_value_at(t, space, flat);
                sum += v;
                worst = std::max(worst, std::abs(v - oracle.at(mask)[flat]));
            }
            worst = std::max(worst, std::abs(sum - w[flat]));
        }
        // Orthogonality over distinct component pairs.
        for (const auto& [J, tj] : dec.components) {
            for (const auto& [K, tk] : dec.components) {
                if (J >= K) continue;
                KahanSum e;
                for (std::size_t flat = 0; flat < w.size(); ++flat)
                    e.add(outcome_probability(space, flat) * table_value_at(tj, space, flat) *
                          table_value_at(tk, space, flat));
                worst = std::max(worst, std::abs(e.value()));
            }
        }
    }
    const double elapsed = seconds_since(t0);
    c.require(worst < 1e-11, "worst deviation " + std::to_string(worst));
    c.require(elapsed < 180.0, "runtime " + std::to_string(elapsed) + "s >= 3min");
    c.detail = "200 kernels, worst deviation " + io::format_double(worst) + ", " +
               std::to_string(elapsed).substr(0, 5) + "s";
    return c;
}

// ---- C6: exchangeable-pair identities -----------------------------------
Criterion c6_pair_identities() {
    Criterion c;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Rng pick(seed, 3);
        const int n = 4 + static_cast<int>(pick.next_u64() % 5);  // 4..8
        const int d = 1 + static_cast<int>(pick.next_u64() % 2);  // 1..2
        auto fix = seeded_degenerate_kernel(seed, n, d);
        if (fix.nu <= 1e-8) continue;

        c.require(regression_residual(fix.kernel, fix.space, fix.d) <= 1e-10,
                  "regression residual, seed " + std::to_string(seed));

        auto st = build_pair_stats(fix.kernel, fix.space, fix.d, fix.nu);
        const double expect_dw2 = 4.0 * fix.d * fix.nu / n;
        const double dev_dw2 = std::abs(st.e_dW2 - expect_dw2) / std::max(1.0, expect_dw2);
        worst = std::max(worst, dev_dw2);
        c.require(dev_dw2 <= 1e-10, "E[(W'-W)^2], seed " + std::to_string(seed));

        auto mi = moment_identities_check(fix.kernel, fix.space, fix.d);
        const double mi_scale = std::max(1.0, std::abs(mi.m4_lhs));
        worst = std::max(worst, mi.worst_abs_dev / mi_scale);
        c.require(mi.worst_abs_dev <= 1e-10 * mi_scale,
                  "moment identities, seed " + std::to_string(seed));

        auto sd = hoeffding_S_decomposition(fix.kernel, fix.space, fix.d, fix.nu);
        const double var_dev = std::abs(sd.var_S_total - sd.var_S_direct) /
                               std::max(1.0, sd.var_S_direct);
        worst = std::max(worst, var_dev);
        c.require(var_dev <= 1e-10, "Var(S) routes, seed " + std::to_string(seed));
    }
    c.detail = "50 kernels, worst relative deviation " + io::format_double(worst);
    return c;
}

// ---- C7: de Jong convergence demo ---------------------------------------
Criterion c7_dejong_demo() {
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();
    DemoOptions opt;
    opt.n_samples = 200000;
    opt.seed = 20240;
    auto rows = demo_sequence("rademacher-quadratic", {6, 8, 10, 12, 16}, 1.0, opt);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        c.require(rows[i].exact, "row not exact");
        c.require(rows[i].emp_d2 <= rows[i].bound,
                  "dominance fails at n=" + std::to_string(rows[i].n));
        if (i > 0)
            c.require(rows[i].bound < rows[i - 1].bound,
                      "bound not strictly decreasing at n=" + std::to_string(rows[i].n));
    }
    // Log-log slope of the exact variant.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const DemoRow& r : rows) {
        const double x = std::log(static_cast<double>(r.n));
        const double y = std::log(r.exact_variant);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = rows.size();
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    c.require(slope >= -0.7 && slope <= -0.3, "slope " + std::to_string(slope));
    const double elapsed = seconds_since(t0);
    c.require(elapsed < 600.0, "runtime " + std::to_string(elapsed) + "s >= 10min");
    c.detail = "slope " + std::to_string(slope).substr(0, 7) + ", " +
               std::to_string(elapsed).substr(0, 5) + "s";
    return c;
}

// ---- C8: Gaussian zero identity and dominance ---------------------------
Criterion c8_gauss() {
    Criterion c;
    // Pointwise identity, no MC tolerance beyond round-off.
    for (int nu : {1, 2, 3}) {
        GaussChaosFunctional F = gauss_identity_nu(nu);
        double worst = 0.0;
        for (std::size_t i = 0; i < 10000; ++i) {
            Rng rng(5000 + nu, i);
            std::vector<double> x(F.dim);
            for (auto& v : x) v = rng.normal();
            const double a = 2.0 * (eval_chaos(F, x) + nu) - malliavin_inner(F, x);
            worst = std::max(worst, std::abs(a));
        }
        c.require(worst <= 1e-12, "identity kernel nu=" + std::to_string(nu) + ": " +
                                      std::to_string(worst));
    }
    // Perturbed kernels dominate the empirical d2 discrepancy at 1e6 samples.
    const std::size_t n = 1000000;
    const auto dict = d2_dictionary();
    for (double eps : {0.05, 0.15}) {
        GaussChaosFunctional F = gauss_perturbed(2, eps, 3);
        auto res = gauss_gamma_bound(F, 2.0, n, 9100);
        auto ws = sample_chaos(F, n, 9100);
        auto d2 = d2_dictionary_vs_centered_gamma(ws, CenteredGammaParams(2.0), dict);
        c.require(res.bound + 4.0 * res.stderr_ >= d2.value,
                  "dominance at eps=" + std::to_string(eps));
    }
    c.detail = "pointwise identity < 1e-12; perturbed bounds dominate empirical d2";
    return c;
}

// ---- C9: Poisson Malliavin suite ----------------------------------------
Criterion c9_poisson() {
    Criterion c;
    PoissonSpace space;
    space.mu.assign(16, 0.3);
    auto F1 = poisson_indicator(space, 4, 1.0);
    auto F2 = poisson_offdiag_constant(space, 0.25);

    // Add-one-point vs chaos-formula derivative, exact pointwise.
    double worst = 0.0;
    for (const auto& F : {F1, F2}) {
        auto feval = [&](std::span<const long> cs) { return eval_poisson_chaos(F, cs); };
        for (std::size_t t = 0; t < 500; ++t) {
            Rng rng(31, t);
            std::vector<long> counts(space.m());
            for (auto& v : counts) v = rng.poisson(0.5);
            for (int z = 0; z < space.m(); ++z)
                worst = std::max(worst, std::abs(add_point_derivative(feval, counts, z) -
                                                 chaos_derivative(F, counts, z)));
        }
    }
    c.require(worst <= 1e-11, "derivative routes differ by " + std::to_string(worst));

    // Isometry at 1e6 samples, 4 batch-means standard errors.
    const std::size_t n = 1000000;
    for (const auto& F : {F1, F2}) {
        auto ws = sample_poisson_chaos(F, n, 77);
        const int n_batches = 32;
        const std::size_t bs = n / n_batches;
        std::vector<double> bvar(n_batches, 0.0);
        KahanSum meanacc;
        for (double w : ws) meanacc.add(w);
        const double mean = meanacc.value() / n;
        for (int b = 0; b < n_batches; ++b) {
            KahanSum acc;
            for (std::size_t i = b * bs; i < (b + 1) * bs; ++i)
                acc.add((ws[i] - mean) * (ws[i] - mean));
            bvar[b] = acc.value() / bs;
        }
        double bm = 0.0;
        for (double v : bvar) bm += v / n_batches;
        double se = 0.0;
        for (double v : bvar) se += (v - bm) * (v - bm);
        se = std::sqrt(se / (n_batches * (n_batches - 1.0)));
        const double target = poisson_chaos_variance(F);
        c.require(std::abs(bm - target) <= 4.0 * se,
                  "isometry: " + std::to_string(bm) + " vs " + std::to_string(target));
    }

    // Integration by parts within 4 pooled standard errors.
    for (const auto& F : {F1, F2}) {
        for (const char* g : {"x", "tanh", "arctan"}) {
            auto rep = ibp_check(F, by_name(g), n, 313);
            c.require(std::abs(rep.diff) <= 4.0 * rep.pooled_stderr,
                      std::string("ibp ") + g + ": diff " + std::to_string(rep.diff) +
                          " vs 4se " + std::to_string(4.0 * rep.pooled_stderr));
        }
    }

    // Closed-form second term: F = I_1(2*1_B), mu(B) = nu/2, nu = 2.
    PoissonSpace sp2;
    sp2.mu.assign(10, 0.2);
    auto rep = poisson_gamma_bound(poisson_indicator(sp2, 5, 2.0), 2.0, 10000, 99);
    c.require(std::abs(rep.second_term - 8.0) <= 1e-12,
              "second term " + std::to_string(rep.second_term) + " != 8");
    c.detail = "derivatives exact; isometry and ibp within 4 se; second term = 4 nu";
    return c;
}

// ---- C10: smoothing lemma and mollification constants --------------------
Criterion c10_smoothing() {
    Criterion c;
    const auto dict = d2_dictionary();
    for (double eps : {0.01, 0.1, 1.0}) {
        std::vector<double> a(64, 0.0), b(64, eps);
        const double d1 = wasserstein1(a, b).value;
        const double d2 = d2_dictionary_two_sample(a, b, dict).value;
        c.require(std::abs(d1 - eps) <= 1e-12, "d1 != eps");
        c.require(std::abs(d2 - eps) <= 1e-9, "d2 != eps");
        c.require(eps <= smoothing_bound(std::min(1.0, d2)) + 1e-12, "lemma fails");
    }
    c.require(std::abs(cm_constant(1) - 1.0) <= 1e-10, "C1");
    c.require(std::abs(cm_constant(2) - std::sqrt(2.0 / M_PI)) <= 1e-10, "C2");
    // Sup-distance envelope on the certification dictionary.
    for (const TestFunction& h : certification_dictionary()) {
        for (double rho : {0.5, 2.0}) {
            TestFunction hr = mollify(h, rho);
            const double cap = *h.lip1 / rho * std::sqrt(2.0 / M_PI);
            double worst = 0.0;
            for (double x = -12.0; x <= 12.0; x += 0.5)
                worst = std::max(worst, std::abs(hr.eval(x) - h.eval(x)));
            c.require(worst <= cap + 1e-9, "envelope fails for " + h.name);
        }
    }
    c.detail = "two-point laws exact; C1 = 1, C2 = sqrt(2/pi); envelope holds";
    return c;
}

// ---- C11: determinism across thread counts -------------------------------
std::string representative_reports(std::uint64_t seed) {
    std::string blob;
    // dejong CSV.
    DemoOptions opt;
    opt.n_samples = 50000;
    opt.seed = seed;
    blob += io::demo_rows_to_csv(demo_sequence("rademacher-quadratic", {6, 8}, 1.0, opt));
    // certify JSON (one combo).
    blob += io::bound_report_to_json(certify_bounds(tf_arctan(), GammaParams(0.5, 1.0))).dump();
    // chaos bounds.
    auto g = gauss_gamma_bound(gauss_perturbed(2, 0.1, 3), 2.0, 100000, seed);
    blob += io::format_double(g.l1_term) + "|" + io::format_double(g.l2_term) + "|" +
            io::format_double(g.stderr_);
    PoissonSpace sp;
    sp.mu.assign(12, 0.4);
    auto p = poisson_gamma_bound(poisson_offdiag_constant(sp, 0.2), 1.0, 100000, seed);
    blob += "|" + io::format_double(p.bound) + "|" + io::format_double(p.stderr_first);
    // distance JSON.
    auto zs = sample_centered_gamma(1.0, 40000, seed);
    auto d2 = d2_dictionary_vs_centered_gamma(zs, CenteredGammaParams(1.0), d2_dictionary());
    blob += "|" + io::format_double(d2.value);
    // pair stats (MC mode exercises the substream merging).
    KernelInstance inst = rademacher_quadratic(8);
    PairMode mode;
    mode.exact = false;
    mode.seed = seed;
    mode.n_samples = 20000;
    blob += io::pair_stats_to_json(build_pair_stats(inst.kernel, inst.space, 2, 1.0, mode))
                .dump();
    return blob;
}

Criterion c11_determinism() {
    Criterion c;
    std::string reference;
    for (const char* threads : {"1", "4", "16"}) {
        setenv("GSTEIN_THREADS", threads, 1);
        const std::string rep = representative_reports(4242);
        if (reference.empty())
            reference = rep;
        else
            c.require(rep == reference,
                      std::string("report differs at GSTEIN_THREADS=") + threads);
    }
    unsetenv("GSTEIN_THREADS");
    c.detail = "byte-identical reports for GSTEIN_THREADS in {1,4,16}";
    return c;
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        std::function<Criterion()> run;
    };
    const std::vector<Entry> criteria = {
        {"C1 Stein residual suite", c1_residuals},
        {"C2 bound certification", c2_bounds},
        {"C3 explosion lower bound", c3_explosion},
        {"C4 centered moment identity", c4_moment_identity},
        {"C5 Hoeffding oracle equivalence", c5_hoeffding_oracle},
        {"C6 exchangeable-pair identities", c6_pair_identities},
        {"C7 de Jong convergence demo", c7_dejong_demo},
        {"C8 Gaussian zero identity and dominance", c8_gauss},
        {"C9 Poisson Malliavin suite", c9_poisson},
        {"C10 smoothing lemma and constants", c10_smoothing},
        {"C11 determinism across thread counts", c11_determinism},
    };
    int failures = 0;
    for (const Entry& e : criteria) {
        Criterion c;
        try {
            c = e.run();
        } catch (const std::exception& ex) {
            c.pass = false;
            c.detail = std::string("exception: ") + ex.what();
        }
        std::printf("[%s] %s (%s)\n", c.pass ? "PASS" : "FAIL", e.name, c.detail.c_str());
        std::fflush(stdout);
        if (!c.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
