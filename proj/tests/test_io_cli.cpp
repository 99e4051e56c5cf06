#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>

#include "gstein/errors.hpp"
#include "gstein/io.hpp"

using namespace gstein;
using nlohmann::json;

#ifndef GSTEIN_CLI_PATH
#define GSTEIN_CLI_PATH "./gstein"
#endif

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GSTEIN_CLI_PATH) + " " + args + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("product space and table kernel round through JSON") {
    json j = {{"factors", json::array({{{"values", {-1.0, 1.0}}, {"probs", {0.5, 0.5}}},
                                       {{"values", {-1.0, 1.0}}, {"probs", {0.5, 0.5}}}})}};
    auto s = io::load_product_space(j);
    CHECK(s.n() == 2);
    CHECK(s.total_points() == 4);

    // Table for psi = x1 * x2 (coordinate 0 fastest): (-1,-1),(1,-1),(-1,1),(1,1).
    json jk = {{"type", "table"}, {"values", {1.0, -1.0, -1.0, 1.0}}};
    auto k = io::load_table_kernel(jk, s);
    double a[2] = {1.0, -1.0};
    CHECK(k.psi(std::span<const double>(a)) == doctest::Approx(-1.0));

    json bad = {{"type", "table"}, {"values", {1.0}}};
    CHECK_THROWS_AS(io::load_table_kernel(bad, s), config_error);
}

TEST_CASE("kernel instance: family form and explicit form") {
    json fam = {{"family", "rademacher-quadratic"}, {"n", 6}, {"nu", 1.0}};
    auto inst = io::load_kernel_instance(fam);
    CHECK(inst.d == 2);
    CHECK(inst.space.n() == 6);

    json exp = {{"space",
                 {{"factors", json::array({{{"values", {-1.0, 1.0}}, {"probs", {0.5, 0.5}}},
                                           {{"values", {-1.0, 1.0}}, {"probs", {0.5, 0.5}}}})}}},
                {"kernel", {{"type", "table"}, {"values", {1.0, -1.0, -1.0, 1.0}}}},
                {"d", 2},
                {"nu", 0.5}};
    auto inst2 = io::load_kernel_instance(exp);
    CHECK(inst2.nu == doctest::Approx(0.5));
}

TEST_CASE("gauss and poisson functional loaders") {
    auto F = io::load_gauss_functional(json{{"name", "identity_nu"}, {"nu", 2}});
    CHECK(F.dim == 2);
    auto F2 = io::load_gauss_functional(json{{"name", "eigs"}, {"eigs", {1.0, -1.0}}});
    CHECK(F2.levels[0].kernel[0] == doctest::Approx(1.0));
    CHECK_THROWS_AS(io::load_gauss_functional(json{{"name", "nope"}}), config_error);

    json pj = {{"mu", {0.5, 0.5}}, {"name", "indicator"}, {"cells", 1}, {"coef", 2.0}};
    auto P = io::load_poisson_functional(pj);
    CHECK(P.levels[0].kernel[0] == doctest::Approx(2.0));
    CHECK(P.levels[0].kernel[1] == doctest::Approx(0.0));
}

TEST_CASE("sample files: csv and binary") {
    {
        std::ofstream out("/tmp/gstein_samples.csv");
        out << "1.5\n-2.25\n0.125,3.5\n";
    }
    auto xs = io::read_samples("/tmp/gstein_samples.csv");
    REQUIRE(xs.size() == 4);
    CHECK(xs[1] == doctest::Approx(-2.25));

    {
        std::ofstream out("/tmp/gstein_samples.f64", std::ios::binary);
        double vals[3] = {1.0, 2.0, 4.0};
        out.write(reinterpret_cast<const char*>(vals), sizeof(vals));
    }
    auto ys = io::read_samples("/tmp/gstein_samples.f64");
    REQUIRE(ys.size() == 3);
    CHECK(ys[2] == doctest::Approx(4.0));
}

TEST_CASE("cli: solve residual and exit codes") {
    CHECK(run_cli("solve --target gamma --r 2 --lambda 1 --h arctan --grid -10:10:0.25 "
                  "--out /tmp/gstein_solve.json") == 0);
    json rep = json::parse(slurp("/tmp/gstein_solve.json"));
    CHECK(rep["schema"] == "gstein.report/1");
    CHECK(rep["results"]["max_residual"].get<double>() < 1e-8);

    CHECK(run_cli("solve --target centered --h x") == 2);        // missing --nu
    CHECK(run_cli("solve --target gamma --h not-a-function") == 2);
}

TEST_CASE("cli: certify explosion and dictionary subset") {
    CHECK(run_cli("certify --explosion --r 0.1 --out /tmp/gstein_cert.json") == 0);
    json rep = json::parse(slurp("/tmp/gstein_cert.json"));
    CHECK(rep["results"][0]["witness"].get<double>() >= 6.06);

    CHECK(run_cli("certify --r-list 0.5,2 --lambda-list 1 --out /tmp/gstein_cert2.json") == 0);
    json rep2 = json::parse(slurp("/tmp/gstein_cert2.json"));
    CHECK(rep2["pass"].get<bool>());
}

TEST_CASE("cli: dejong csv table") {
    CHECK(run_cli("dejong --family rademacher-quadratic --n 6,8 --nu 1 --samples 20000 "
                  "--format csv --out /tmp/gstein_dejong.csv") == 0);
    const std::string csv = slurp("/tmp/gstein_dejong.csv");
    CHECK(csv.rfind("n,moment_discrepancy,rho2,bigD,bound,exact_variant,emp_d2,emp_d1\n", 0) ==
          0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    CHECK(run_cli("dejong --family unknown-family --n 6 --nu 1") == 2);

    // Exact-only mode refuses sizes beyond the enumeration cap.
    CHECK(run_cli("dejong --family rademacher-quadratic --n 21 --nu 1 --samples 2000 "
                  "--exact-only --out /dev/null") == 3);
}

TEST_CASE("cli: chaos bounds") {
    CHECK(run_cli("chaos --model gauss --kernel identity_nu --nu 3 --samples 20000 "
                  "--out /tmp/gstein_chaos.json") == 0);
    json rep = json::parse(slurp("/tmp/gstein_chaos.json"));
    CHECK(rep["results"]["bound"].get<double>() <= 1e-12);

    CHECK(run_cli("chaos --model poisson --kernel indicator --nu 2 --samples 20000 "
                  "--out /tmp/gstein_chaos2.json") == 0);
    json rep2 = json::parse(slurp("/tmp/gstein_chaos2.json"));
    CHECK(rep2["results"]["second_term"].get<double>() == doctest::Approx(8.0));

    CHECK(run_cli("chaos --model gauss --kernel no-such-kernel --nu 1") == 2);
}

TEST_CASE("cli: hoeffding decomposition from an instance file") {
    {
        std::ofstream out("/tmp/gstein_inst.json");
        out << R"({"family": "rademacher-quadratic", "n": 5, "nu": 1.0})";
    }
    CHECK(run_cli("hoeffding --input /tmp/gstein_inst.json --out /tmp/gstein_hoeff.json") == 0);
    json rep = json::parse(slurp("/tmp/gstein_hoeff.json"));
    CHECK(rep["results"]["degenerate"].get<bool>());
    CHECK(rep["results"]["rho2"].get<double>() == doctest::Approx(4.0 / 5.0));
    CHECK(rep["results"]["bigD"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("cli: config file values apply unless overridden by flags") {
    {
        std::ofstream out("/tmp/gstein_cfg.json");
        out << R"({"family": "rademacher-quadratic", "n": "6", "nu": 1.0, )"
            << R"("samples": 20000, "format": "csv"})";
    }
    CHECK(run_cli("dejong --config /tmp/gstein_cfg.json --out /tmp/gstein_cfg_out.csv") == 0);
    const std::string csv = slurp("/tmp/gstein_cfg_out.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one row

    CHECK(run_cli("dejong --config /tmp/gstein_cfg.json --n 6,8 "
                  "--out /tmp/gstein_cfg_out2.csv") == 0);
    const std::string csv2 = slurp("/tmp/gstein_cfg_out2.csv");
    CHECK(std::count(csv2.begin(), csv2.end(), '\n') == 3);  // flag overrides config
}

TEST_CASE("cli: distance commands on sample files") {
    {
        std::ofstream a("/tmp/gstein_a.csv"), b("/tmp/gstein_b.csv");
        for (int i = 0; i < 100; ++i) {
            a << 0.0 << "\n";
            b << 0.25 << "\n";
        }
    }
    CHECK(run_cli("distance --kind d1 --a /tmp/gstein_a.csv --b /tmp/gstein_b.csv "
                  "--out /tmp/gstein_d1.json") == 0);
    json rep = json::parse(slurp("/tmp/gstein_d1.json"));
    CHECK(rep["results"]["value"].get<double>() == doctest::Approx(0.25));
    CHECK(rep["results"]["kind"] == "exact");

    CHECK(run_cli("distance --kind d2 --a /tmp/gstein_a.csv --b /tmp/gstein_b.csv "
                  "--out /tmp/gstein_d2.json") == 0);
    json rep2 = json::parse(slurp("/tmp/gstein_d2.json"));
    CHECK(rep2["results"]["value"].get<double>() == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(rep2["results"]["kind"] == "lower_bound");
}

TEST_CASE("cli: byte-identical reports across thread counts") {
    const std::string base = "dejong --family rademacher-quadratic --n 6,8 --nu 1 "
                             "--samples 20000 --format csv --seed 42 --out ";
    std::string ref;
    for (const char* threads : {"1", "4", "16"}) {
        const std::string path = std::string("/tmp/gstein_threads_") + threads + ".csv";
        const std::string cmd = std::string("GSTEIN_THREADS=") + threads + " " +
                                GSTEIN_CLI_PATH + " " + base + path + " 2>/dev/null";
        REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
        const std::string content = slurp(path);
        if (ref.empty())
            ref = content;
        else
            CHECK(content == ref);
    }
}
