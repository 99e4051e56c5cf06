#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "gstein/distances.hpp"
#include "gstein/errors.hpp"
#include "gstein/io.hpp"

using namespace gstein;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitCertification = 4;

struct Common {
    std::string out = "-";
    std::string format = "json";
    std::uint64_t seed = 0;
    std::string config_file;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--out", c.out, "output path ('-' for stdout)");
    cmd->add_option("--format", c.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--seed", c.seed, "run seed");
    cmd->add_option("--config", c.config_file, "JSON config file; explicit flags override");
}

json load_config(const Common& c) {
    if (c.config_file.empty()) return json::object();
    std::ifstream in(c.config_file);
    if (!in) throw config_error("cannot open config file: " + c.config_file);
    json j;
    in >> j;
    return j;
}

// Applies a config value only when the flag was not given on the command line.
template <typename T>
void cfg_default(CLI::App* cmd, const json& cfg, const char* flag, const char* key, T& target) {
    if (cfg.contains(key) && cmd->count(flag) == 0) target = cfg.at(key).get<T>();
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

int cmd_solve(const Common& common, const std::string& target, double r, double lambda,
              double nu, const std::string& hname, const std::string& grid_spec) {
    json cfg = {{"target", target}, {"h", hname},     {"grid", grid_spec},
                {"r", r},           {"lambda", lambda}, {"nu", nu}};
    TestFunction h = by_name(hname);
    SteinSolution sol = target == "gamma" ? solve_stein_gamma(h, GammaParams(r, lambda))
                                          : solve_stein_centered(h, nu);
    double lo = -10.0, hi = 10.0, step = 0.1;
    if (!grid_spec.empty()) {
        std::stringstream ss(grid_spec);
        std::string a, b, c;
        std::getline(ss, a, ':');
        std::getline(ss, b, ':');
        std::getline(ss, c, ':');
        lo = std::stod(a);
        hi = std::stod(b);
        step = std::stod(c);
    }
    json rows = json::array();
    double max_residual = 0.0;
    const double eh = sol.expected_h();
    for (double x = lo; x <= hi + 1e-12; x += step) {
        const double fv = sol.f(x);
        const double fp = sol.fprime(x);
        const double fpi = sol.fprime_integral(x);
        double res;
        if (sol.is_centered())
            res = 2.0 * (x + nu) * fpi - x * fv - (h.eval(x) - eh);
        else
            res = x * fpi + (r - lambda * x) * fv - (h.eval(x) - eh);
        max_residual = std::max(max_residual, std::abs(res));
        rows.push_back({{"x", x}, {"f", fv}, {"fprime", fp}, {"residual", res}});
    }
    json rep = io::report_envelope("solve", cfg, common.seed);
    rep["results"] = {{"expected_h", eh}, {"max_residual", max_residual}, {"grid", rows}};
    io::write_text(common.out, rep.dump(2) + "\n");
    return 0;
}

int cmd_certify(const Common& common, const std::string& rs, const std::string& lambdas,
                const std::string& nus, bool explosion, double explosion_r) {
    json cfg = {{"r", rs}, {"lambda", lambdas}, {"nu", nus}, {"explosion", explosion}};
    json results = json::array();
    bool all_pass = true;
    if (explosion) {
        const double witness = explosion_witness(explosion_r);
        const double floor = std::exp(-0.5) / explosion_r;
        all_pass = witness >= floor - 1e-8;
        results.push_back(
            {{"r", explosion_r}, {"witness", witness}, {"floor", floor}, {"pass", all_pass}});
    } else {
        const auto dict = certification_dictionary();
        for (double rv : parse_list(rs.empty() ? "0.5,1,2,5" : rs)) {
            for (double lv : parse_list(lambdas.empty() ? "1" : lambdas)) {
                for (const TestFunction& h : dict) {
                    BoundReport rep = certify_bounds(h, GammaParams(rv, lv));
                    all_pass = all_pass && rep.pass;
                    json jr = io::bound_report_to_json(rep);
                    jr["r"] = rv;
                    jr["lambda"] = lv;
                    results.push_back(jr);
                }
            }
        }
        if (!nus.empty()) {
            for (double nv : parse_list(nus)) {
                for (const TestFunction& h : dict) {
                    BoundReport rep = certify_bounds(h, CenteredGammaParams(nv));
                    all_pass = all_pass && rep.pass;
                    json jr = io::bound_report_to_json(rep);
                    jr["nu"] = nv;
                    results.push_back(jr);
                }
            }
        }
    }
    json rep = io::report_envelope("certify", cfg, common.seed);
    rep["results"] = results;
    rep["pass"] = all_pass;
    io::write_text(common.out, rep.dump(2) + "\n");
    return all_pass ? 0 : kExitCertification;
}

int cmd_hoeffding(const Common& common, const std::string& input, int d) {
    std::ifstream in(input);
    if (!in) throw config_error("cannot open instance file: " + input);
    json j;
    in >> j;
    KernelInstance inst = io::load_kernel_instance(j);
    if (d > 0) inst.d = d;
    auto dec = hoeffding_decompose(inst.kernel, inst.space);
    auto degen = verify_degeneracy(dec, inst.d, 1e-11);
    json rep = io::report_envelope("hoeffding", j, common.seed);
    json sig = json::object();
    int zero_variance = 0;
    for (const auto& [mask, s2] : dec.sigma2) {
        if (s2 > 1e-15)
            sig[std::to_string(mask)] = s2;
        else
            ++zero_variance;
    }
    rep["results"] = {{"mean", dec.mean},
                      {"sigma2", sig},
                      {"degenerate", degen.degenerate},
                      {"zero_variance_components", zero_variance}};
    if (degen.degenerate) {
        auto st = component_stats(dec, inst.d, inst.space);
        rep["results"]["rho2"] = st.rho2;
        rep["results"]["bigD"] = st.bigD;
    }
    io::write_text(common.out, rep.dump(2) + "\n");
    return 0;
}

int cmd_dejong(const Common& common, const std::string& family, const std::string& ns,
               double nu, std::size_t samples, bool exact_only) {
    json cfg = {{"family", family}, {"n", ns}, {"nu", nu}, {"samples", samples}};
    DemoOptions opt;
    opt.n_samples = samples;
    opt.seed = common.seed;
    auto rows = demo_sequence(family, parse_int_list(ns), nu, opt);
    for (const DemoRow& r : rows)
        if (!r.exact)
            std::cerr << "warning: n = " << r.n
                      << " exceeds the exact enumeration cap; Monte Carlo estimates used\n";
    if (exact_only) {
        for (const DemoRow& r : rows)
            if (!r.exact)
                throw resource_error("dejong: exact mode exceeded the cap at n = " +
                                         std::to_string(r.n),
                                     0);
    }
    if (common.format == "csv") {
        io::write_text(common.out, io::demo_rows_to_csv(rows));
    } else {
        json rep = io::report_envelope("dejong", cfg, common.seed);
        rep["results"] = io::demo_rows_to_json(rows);
        io::write_text(common.out, rep.dump(2) + "\n");
    }
    return 0;
}

int cmd_chaos(const Common& common, const std::string& model, const std::string& kernel,
              double nu, std::size_t samples, int p, double eps) {
    json cfg = {{"model", model}, {"kernel", kernel}, {"nu", nu},
                {"samples", samples}, {"p", p}};
    json rep = io::report_envelope("chaos", cfg, common.seed);
    auto check_order = [p](int pure_p, bool is_pure) {
        if (p > 0 && (!is_pure || pure_p != p))
            throw config_error("chaos: kernel is not a pure order-" + std::to_string(p) +
                               " functional");
    };
    if (model == "gauss") {
        GaussChaosFunctional F;
        if (kernel == "identity_nu")
            F = gauss_identity_nu(static_cast<int>(nu));
        else if (kernel == "perturbed")
            F = gauss_perturbed(static_cast<int>(nu), eps);
        else if (!kernel.empty() && kernel[0] == '{')
            F = io::load_gauss_functional(json::parse(kernel));
        else {
            std::ifstream in(kernel);
            if (!in) throw config_error("unknown gauss kernel: " + kernel);
            json j;
            in >> j;
            F = io::load_gauss_functional(j);
        }
        check_order(F.levels.size() == 1 ? F.levels[0].p : 0, F.levels.size() == 1);
        auto res = gauss_gamma_bound(F, nu, std::max<std::size_t>(samples, 10000), common.seed);
        rep["results"] = {{"l1_term", res.l1_term},
                          {"l2_term", res.l2_term},
                          {"bound", res.bound},
                          {"bound_l2", res.bound_l2},
                          {"stderr", res.stderr_}};
    } else if (model == "poisson") {
        PoissonChaosFunctional F;
        if (kernel == "indicator") {
            PoissonSpace space;
            space.mu.assign(10, nu / 10.0);  // mu(B) = nu/2 over the first half
            F = poisson_indicator(space, 5, 2.0);
        } else if (!kernel.empty() && kernel[0] == '{') {
            F = io::load_poisson_functional(json::parse(kernel));
        } else {
            std::ifstream in(kernel);
            if (!in) throw config_error("unknown poisson kernel: " + kernel);
            json j;
            in >> j;
            F = io::load_poisson_functional(j);
        }
        check_order(F.levels.size() == 1 ? F.levels[0].p : 0, F.levels.size() == 1);
        auto res = poisson_gamma_bound(F, nu, std::max<std::size_t>(samples, 1000), common.seed);
        rep["results"] = {{"first_term", res.first_term},
                          {"first_term_l2", res.first_term_l2},
                          {"second_term", res.second_term},
                          {"bound", res.bound},
                          {"bound_l2", res.bound_l2},
                          {"stderr_first", res.stderr_first},
                          {"stderr_second", res.stderr_second}};
    } else {
        throw config_error("chaos: model must be gauss or poisson");
    }
    io::write_text(common.out, rep.dump(2) + "\n");
    return 0;
}

int cmd_distance(const Common& common, const std::string& kind, const std::string& a_path,
                 const std::string& b_path, double target_nu) {
    json cfg = {{"kind", kind}, {"a", a_path}, {"b", b_path}, {"target_nu", target_nu}};
    auto a = io::read_samples(a_path);
    DistanceEstimate est;
    if (kind == "d1") {
        est = wasserstein1(a, io::read_samples(b_path));
    } else if (kind == "d2") {
        if (!b_path.empty())
            est = d2_dictionary_two_sample(a, io::read_samples(b_path), d2_dictionary());
        else
            est = d2_dictionary_vs_centered_gamma(a, CenteredGammaParams(target_nu),
                                                  d2_dictionary());
    } else if (kind == "ks") {
        CenteredGammaParams p(target_nu);
        est = kolmogorov(a, [p](double x) { return centered_gamma_cdf(x, p); });
    } else {
        throw config_error("distance: kind must be d1, d2 or ks");
    }
    json rep = io::report_envelope("distance", cfg, common.seed);
    const char* kind_name = est.kind == DistanceEstimate::Kind::exact ? "exact"
                            : est.kind == DistanceEstimate::Kind::lower_bound ? "lower_bound"
                                                                              : "mc_estimate";
    rep["results"] = {{"name", kind}, {"value", est.value}, {"kind", kind_name}};
    if (est.stderr_) rep["results"]["stderr"] = *est.stderr_;
    io::write_text(common.out, rep.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gamma Stein equation toolkit"};
    app.require_subcommand(1);
    // The solve command exposes --h (the test function), so the help flag
    // keeps only its long spelling.
    app.set_help_flag("--help", "print help");

    Common common;

    // solve
    auto* solve = app.add_subcommand("solve", "solve the Stein equation on a grid");
    solve->set_help_flag("--help", "print help");
    std::string target = "gamma", hname = "arctan", grid;
    double r = 1.0, lambda = 1.0, nu = 0.0;
    solve->add_option("--target", target)->check(CLI::IsMember({"gamma", "centered"}));
    solve->add_option("--r", r);
    solve->add_option("--lambda", lambda);
    solve->add_option("--nu", nu);
    solve->add_option("--h", hname);
    solve->add_option("--grid", grid, "lo:hi:step");
    add_common(solve, common);

    // certify
    auto* certify = app.add_subcommand("certify", "certify smoothness bounds");
    std::string rs, lambdas, nus;
    bool explosion = false;
    double explosion_r = 1.0;
    certify->add_option("--r-list", rs);
    certify->add_option("--lambda-list", lambdas);
    certify->add_option("--nu-list", nus);
    certify->add_flag("--explosion", explosion);
    certify->add_option("--r", explosion_r);
    add_common(certify, common);

    // hoeffding
    auto* hoeff = app.add_subcommand("hoeffding", "exact Hoeffding decomposition");
    std::string input;
    int d = 0;
    hoeff->add_option("--input", input)->required();
    hoeff->add_option("--d", d);
    add_common(hoeff, common);

    // dejong
    auto* dejong = app.add_subcommand("dejong", "de Jong convergence table");
    std::string family = "rademacher-quadratic", ns = "6,8,10,12";
    double dnu = 1.0;
    std::size_t samples = 200000;
    bool exact_only = false;
    dejong->add_option("--family", family);
    dejong->add_option("--n", ns);
    dejong->add_option("--nu", dnu);
    dejong->add_option("--samples", samples);
    dejong->add_flag("--exact-only", exact_only);
    add_common(dejong, common);

    // chaos
    auto* chaos = app.add_subcommand("chaos", "Malliavin-type Gamma bounds");
    std::string model = "gauss", kernel = "identity_nu";
    double cnu = 1.0, eps = 0.1;
    std::size_t csamples = 100000;
    int p = 0;
    chaos->add_option("--model", model);
    chaos->add_option("--kernel", kernel);
    chaos->add_option("--nu", cnu);
    chaos->add_option("--samples", csamples);
    chaos->add_option("--p", p, "assert the pure chaos order of the kernel");
    chaos->add_option("--eps", eps);
    add_common(chaos, common);

    // distance
    auto* dist = app.add_subcommand("distance", "distance estimates between sample files");
    std::string kind = "d1", a_path, b_path;
    double target_nu = 1.0;
    dist->add_option("--kind", kind);
    dist->add_option("--a", a_path)->required();
    dist->add_option("--b", b_path);
    dist->add_option("--target-nu", target_nu);
    add_common(dist, common);

    const auto t0 = std::chrono::steady_clock::now();
    int code = 0;
    try {
        app.parse(argc, argv);
        const json cfg = load_config(common);
        if (solve->parsed()) {
            cfg_default(solve, cfg, "--target", "target", target);
            cfg_default(solve, cfg, "--r", "r", r);
            cfg_default(solve, cfg, "--lambda", "lambda", lambda);
            cfg_default(solve, cfg, "--nu", "nu", nu);
            cfg_default(solve, cfg, "--h", "h", hname);
            cfg_default(solve, cfg, "--grid", "grid", grid);
            if (target == "centered" && !(nu > 0.0))
                throw config_error("solve: centered target requires --nu > 0");
            code = cmd_solve(common, target, r, lambda, nu, hname, grid);
        } else if (certify->parsed()) {
            cfg_default(certify, cfg, "--r-list", "r_list", rs);
            cfg_default(certify, cfg, "--lambda-list", "lambda_list", lambdas);
            cfg_default(certify, cfg, "--nu-list", "nu_list", nus);
            code = cmd_certify(common, rs, lambdas, nus, explosion, explosion_r);
        } else if (hoeff->parsed()) {
            cfg_default(hoeff, cfg, "--d", "d", d);
            code = cmd_hoeffding(common, input, d);
        } else if (dejong->parsed()) {
            cfg_default(dejong, cfg, "--family", "family", family);
            cfg_default(dejong, cfg, "--n", "n", ns);
            cfg_default(dejong, cfg, "--nu", "nu", dnu);
            cfg_default(dejong, cfg, "--samples", "samples", samples);
            cfg_default(dejong, cfg, "--format", "format", common.format);
            code = cmd_dejong(common, family, ns, dnu, samples, exact_only);
        } else if (chaos->parsed()) {
            cfg_default(chaos, cfg, "--model", "model", model);
            cfg_default(chaos, cfg, "--kernel", "kernel", kernel);
            cfg_default(chaos, cfg, "--nu", "nu", cnu);
            cfg_default(chaos, cfg, "--samples", "samples", csamples);
            code = cmd_chaos(common, model, kernel, cnu, csamples, p, eps);
        } else if (dist->parsed()) {
            cfg_default(dist, cfg, "--kind", "kind", kind);
            cfg_default(dist, cfg, "--target-nu", "target_nu", target_nu);
            code = cmd_distance(common, kind, a_path, b_path, target_nu);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const contract_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const accuracy_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const resource_error& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    const auto t1 = std::chrono::steady_clock::now();
    std::cerr << "wall_time_ms="
              << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() << "\n";
    return code;
}
