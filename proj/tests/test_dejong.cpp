#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "gstein/dejong.hpp"
#include "gstein/distances.hpp"
#include "gstein/parallel.hpp"
#include "gstein/errors.hpp"
#include "gstein/stein_core.hpp"
#include "support/degenerate_kernels.hpp"

using namespace gstein;
using gstein::testsupport::seeded_degenerate_kernel;

TEST_CASE("pair second moment: E[(W'-W)^2] = 4 d nu / n") {
    for (int n : {4, 6}) {
        KernelInstance inst = rademacher_quadratic(n);
        auto st = build_pair_stats(inst.kernel, inst.space, inst.d, inst.nu);
        CHECK(st.e_dW2 == doctest::Approx(4.0 * inst.d * inst.nu / n).epsilon(1e-12));
        CHECK(st.r_zero);
        CHECK(st.lambda_pair == doctest::Approx(static_cast<double>(inst.d) / n));
    }
}

TEST_CASE("two-coordinate product kernel: 16-outcome enumeration oracle") {
    // psi = x1 x2 on Rademacher pairs: m2 = 1, nu = 1/2, d = 2, n = 2.
    auto s = rademacher_space(2);
    UStatKernel k;
    k.psi = [](std::span<const double> x) { return x[0] * x[1]; };
    auto st = build_pair_stats(k, s, 2, 0.5);
    // E[(W'-W)^2] = 4 d nu / n = 4*2*0.5/2 = 2 (matches the hand enumeration:
    // replacing either coordinate flips W with probability 1/2).
    CHECK(st.e_dW2 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(st.e_dW4 == doctest::Approx(8.0).epsilon(1e-12));  // |dW| in {0, 2}
    CHECK(st.r_zero);
}

TEST_CASE("regression identity and exchangeability of the joint table") {
    KernelInstance inst = rademacher_quadratic(5);
    CHECK(regression_residual(inst.kernel, inst.space, inst.d) <= 1e-11);

    auto joint = joint_pair_table(inst.kernel, inst.space);
    // Swap symmetry: aggregate probabilities by quantized (w, w') keys.
    std::map<std::pair<long, long>, double> law, swapped;
    for (const auto& e : joint) {
        auto key = [](double a, double b) {
            return std::make_pair(std::lround(a * 1e9), std::lround(b * 1e9));
        };
        law[key(e.w, e.w_prime)] += e.prob;
        swapped[key(e.w_prime, e.w)] += e.prob;
    }
    REQUIRE(law.size() == swapped.size());
    for (const auto& [key, p] : law) {
        CHECK(swapped.count(key) == 1);
        CHECK(p == doctest::Approx(swapped.at(key)).epsilon(1e-10));
    }
}

TEST_CASE("nu mismatch is rejected in exact mode") {
    KernelInstance inst = rademacher_quadratic(4);
    CHECK_THROWS_AS(build_pair_stats(inst.kernel, inst.space, inst.d, 1.7), contract_error);
}

TEST_CASE("S decomposition: U_empty = 2 nu, Var(S) routes agree, E[W^3] identity") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto fix = seeded_degenerate_kernel(seed, 5, 2);
        auto sd = hoeffding_S_decomposition(fix.kernel, fix.space, fix.d, fix.nu);
        CHECK(sd.u_empty == doctest::Approx(2.0 * fix.nu).epsilon(1e-10));
        CHECK(sd.var_S_total == doctest::Approx(sd.var_S_direct).epsilon(1e-9));
        CHECK(sd.ew3_from_cov == doctest::Approx(sd.ew3).epsilon(1e-9));
        CHECK(sd.var_S2 == doctest::Approx(sd.var_s2_identity).epsilon(1e-9));
    }
}

TEST_CASE("S decomposition for a linear statistic (d = 1)") {
    // W = sum x_i / sqrt(n) over Rademacher: m2 = 1, nu = 1/2.
    const int n = 5;
    auto s = rademacher_space(n);
    UStatKernel k;
    k.psi = [n](std::span<const double> x) {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += x[i];
        return v / std::sqrt(static_cast<double>(n));
    };
    auto sd = hoeffding_S_decomposition(k, s, 1, 0.5);
    CHECK(sd.var_S2 == doctest::Approx(sd.var_s2_identity).epsilon(1e-9));
    CHECK(sd.var_S_total == doctest::Approx(sd.var_S_direct).epsilon(1e-9));
}

TEST_CASE("exchangeable-pair moment identities (Lemma-level, exact)") {
    auto s = rademacher_space(2);
    UStatKernel k;
    k.psi = [](std::span<const double> x) { return x[0] * x[1]; };
    auto rep = moment_identities_check(k, s, 2);
    CHECK(rep.worst_abs_dev <= 1e-12);

    auto fix = seeded_degenerate_kernel(17, 6, 2);
    auto rep2 = moment_identities_check(fix.kernel, fix.space, fix.d);
    CHECK(rep2.worst_abs_dev <= 1e-11);

    // Point-mass-at-zero kernel: 0 = 0.
    UStatKernel zero;
    zero.psi = [](std::span<const double>) { return 0.0; };
    auto rep3 = moment_identities_check(zero, s, 1);
    CHECK(rep3.worst_abs_dev == doctest::Approx(0.0));
}

TEST_CASE("exact-side bound dominance: exact_variant >= d2 dictionary discrepancy") {
    // Both sides exact: E h(W) by enumeration, E h(Z_nu) by quadrature.
    KernelInstance inst = rademacher_quadratic(10);
    auto b = dejong_bound(inst.kernel, inst.space, inst.d, inst.nu);
    const auto w = eval_kernel_table(inst.kernel, inst.space);
    CenteredGammaParams target(inst.nu);
    double sup = 0.0;
    for (const TestFunction& h : d2_dictionary()) {
        KahanSum ehw;
        for (std::size_t flat = 0; flat < w.size(); ++flat)
            ehw.add(outcome_probability(inst.space, flat) * h.eval(w[flat]));
        sup = std::max(sup, std::abs(ehw.value() - expected_on_centered_gamma(h, target)));
    }
    CHECK(sup <= b.exact_variant_total);
    CHECK(sup > 0.0);
}

TEST_CASE("E[S] vanishes in exact mode") {
    for (std::uint64_t seed : {21u, 22u}) {
        auto fix = seeded_degenerate_kernel(seed, 5, 2);
        auto st = build_pair_stats(fix.kernel, fix.space, fix.d, fix.nu);
        CHECK(std::abs(st.e_S) <= 1e-11 * std::max(1.0, std::abs(st.m2)));
    }
}

TEST_CASE("chain inequality and bound dominance on seeded kernels") {
    for (std::uint64_t seed : {4u, 9u}) {
        auto fix = seeded_degenerate_kernel(seed, 5, 2);
        auto st = build_pair_stats(fix.kernel, fix.space, fix.d, fix.nu);
        const int n = fix.space.n();
        // (bound11): 3 Var(S) <= |moment functional| + (n/4d) E[(W'-W)^4].
        const double mf = st.m4 - 12.0 * st.m3 - 12.0 * fix.nu * fix.nu + 48.0 * fix.nu;
        CHECK(3.0 * st.var_S <=
              std::abs(mf) + n / (4.0 * fix.d) * st.e_dW4 + 1e-10);

        auto b = dejong_bound(fix.kernel, fix.space, fix.d, fix.nu);
        CHECK(b.total == doctest::Approx(b.moment_term + b.rho_term));
        // The exact-fourth-moment route sits between the plug-in variant and
        // the quadruple-sum route.
        CHECK(b.exact_variant_total <= b.total_pair4 + 1e-12);
        CHECK(b.total_pair4 <= b.total + 1e-12);
    }
}

TEST_CASE("synthetic moment functional vanishes on exact centered-Gamma moments") {
    // dejong_bound's moment term is zero iff the 4-3-moment functional is
    // zero; feed moments of Z_nu through the formula directly.
    const double nu = 1.3;
    const double m3 = centered_gamma_moment(nu, 3);
    const double m4 = centered_gamma_moment(nu, 4);
    CHECK(std::abs(m4 - 12.0 * m3 - 12.0 * nu * nu + 48.0 * nu) <= 1e-9);
}

TEST_CASE("closed forms for the exactly normalized Rademacher quadratic family") {
    for (int n : {6, 8}) {
        KernelInstance inst = rademacher_quadratic(n);
        auto b = dejong_bound(inst.kernel, inst.space, inst.d, inst.nu);
        CHECK(b.rho2 == doctest::Approx(4.0 / n).epsilon(1e-10));
        CHECK(b.bigD == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("C_d policy: user constant and require") {
    KernelInstance inst = rademacher_quadratic(6);
    CdPolicy pol;
    pol.mode = CdPolicy::Mode::user_constant;
    pol.c_d = 10.0;
    auto b = dejong_bound(inst.kernel, inst.space, inst.d, inst.nu, pol);
    const double cap = 2.0;  // max(1, 2/nu), nu = 1
    const double coeff = ((2.0 * std::sqrt(3.0) + 4.0) * cap + 4.0) / (12.0 * std::sqrt(2.0));
    CHECK(b.rho_term ==
          doctest::Approx(coeff * std::sqrt(16.0 * 10.0 * 1.0 * b.rho2)).epsilon(1e-12));

    CdPolicy req;
    req.mode = CdPolicy::Mode::require;
    CHECK_THROWS_AS(dejong_bound(inst.kernel, inst.space, inst.d, inst.nu, req), config_error);
}

TEST_CASE("mc mode approaches the exact statistics") {
    KernelInstance inst = rademacher_quadratic(8);
    auto exact = build_pair_stats(inst.kernel, inst.space, inst.d, inst.nu);
    PairMode mode;
    mode.exact = false;
    mode.seed = 99;
    mode.n_samples = 40000;
    auto mc = build_pair_stats(inst.kernel, inst.space, inst.d, inst.nu, mode);
    CHECK(mc.e_dW2 == doctest::Approx(exact.e_dW2).epsilon(0.05));
    CHECK(mc.e_abs_dW3 == doctest::Approx(exact.e_abs_dW3).epsilon(0.1));
    CHECK(mc.var_S == doctest::Approx(exact.var_S).epsilon(0.25));
    CHECK(mc.stderrs.at("e_abs_dW3") > 0.0);
    CHECK(std::abs(mc.e_abs_dW3 - exact.e_abs_dW3) <=
          6.0 * mc.stderrs.at("e_abs_dW3") + 1e-3);

    PairMode bad = mode;
    bad.n_samples = 10;
    CHECK_THROWS_AS(build_pair_stats(inst.kernel, inst.space, inst.d, inst.nu, bad),
                    contract_error);
}

TEST_CASE("seeded multilinear family: degenerate of its degree, normalized variance") {
    for (int d : {2, 3}) {
        KernelInstance inst = multilinear_form(7, d, 1.5, 99);
        auto oc = order_d_components(inst.kernel, inst.space, d);
        CHECK(oc.reconstruction_error <= 1e-11);
        auto st = build_pair_stats(inst.kernel, inst.space, d, 1.5);
        CHECK(st.m2 == doctest::Approx(3.0).epsilon(1e-10));
        CHECK(st.r_zero);
        auto b = dejong_bound(inst.kernel, inst.space, d, 1.5);
        CHECK(b.exact_variant_total <= b.total_pair4 + 1e-12);
    }
}

TEST_CASE("demo sequence falls back to Monte Carlo beyond the enumeration cap") {
    DemoOptions opt;
    opt.n_samples = 20000;
    opt.seed = 5;
    auto rows = demo_sequence("rademacher-quadratic", {21}, 1.0, opt);  // 2^21 > cap
    REQUIRE(rows.size() == 1);
    CHECK_FALSE(rows[0].exact);
    CHECK(rows[0].bound > 0.0);
    CHECK(std::isfinite(rows[0].moment_discrepancy));
    CHECK(rows[0].emp_d2 <= rows[0].bound);
}

TEST_CASE("demo sequence rows behave") {
    DemoOptions opt;
    opt.n_samples = 50000;
    opt.seed = 2024;
    auto rows = demo_sequence("rademacher-quadratic", {6, 8, 10}, 1.0, opt);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].exact);
        CHECK(rows[i].bigD == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(rows[i].rho2 == doctest::Approx(4.0 / rows[i].n).epsilon(1e-9));
        CHECK(rows[i].emp_d2 <= rows[i].bound);
        CHECK(rows[i].exact_variant <= rows[i].bound + 1e-12);
        if (i > 0) CHECK(rows[i].bound < rows[i - 1].bound);
    }
}
