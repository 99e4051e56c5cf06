#include "gstein/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gstein/errors.hpp"

namespace gstein::io {

using nlohmann::json;

DiscreteProductSpace load_product_space(const json& j) {
    if (!j.contains("factors") || !j["factors"].is_array())
        throw config_error("product space: missing 'factors' array");
    DiscreteProductSpace s;
    for (const auto& jf : j["factors"]) {
        DiscreteFactor f;
        f.values = jf.at("values").get<std::vector<double>>();
        f.probs = jf.at("probs").get<std::vector<double>>();
        s.factors.push_back(std::move(f));
    }
    if (j.contains("cap")) s.cap = j["cap"].get<std::size_t>();
    s.validate();
    return s;
}

UStatKernel load_table_kernel(const json& j, const DiscreteProductSpace& s) {
    if (j.value("type", "table") != "table")
        throw config_error("kernel: expected type 'table'");
    auto values = std::make_shared<std::vector<double>>(
        j.at("values").get<std::vector<double>>());
    if (values->size() != s.total_points())
        throw config_error("kernel table size does not match the product space");
    // Index lookup by atom value per coordinate.
    auto space = std::make_shared<DiscreteProductSpace>(s);
    UStatKernel k;
    k.psi = [values, space](std::span<const double> x) {
        std::size_t flat = 0, stride = 1;
        for (int jc = 0; jc < space->n(); ++jc) {
            const auto& vals = space->factors[jc].values;
            std::size_t ij = 0;
            while (ij < vals.size() && vals[ij] != x[jc]) ++ij;
            flat += ij * stride;
            stride *= vals.size();
        }
        return (*values)[flat];
    };
    return k;
}

KernelInstance load_kernel_instance(const json& j) {
    if (j.contains("family")) {
        const std::string family = j.at("family").get<std::string>();
        const int n = j.at("n").get<int>();
        const double nu = j.value("nu", 1.0);
        const std::uint64_t seed = j.value("seed", 0ull);
        return family_by_name(family, n, nu, seed);
    }
    KernelInstance inst;
    inst.name = j.value("name", "custom");
    inst.space = load_product_space(j.at("space"));
    inst.kernel = load_table_kernel(j.at("kernel"), inst.space);
    inst.d = j.at("d").get<int>();
    inst.nu = j.at("nu").get<double>();
    return inst;
}

GaussChaosFunctional load_gauss_functional(const json& j) {
    if (j.contains("name")) {
        const std::string name = j.at("name").get<std::string>();
        if (name == "identity_nu")
            return gauss_identity_nu(j.at("nu").get<int>(), j.value("dim", 0));
        if (name == "perturbed")
            return gauss_perturbed(j.at("nu").get<int>(), j.at("eps").get<double>(),
                                   j.value("dim", 0));
        if (name == "eigs")
            return gauss_from_eigenvalues(j.at("eigs").get<std::vector<double>>());
        throw config_error("unknown gauss kernel family: " + name);
    }
    GaussChaosFunctional F;
    F.dim = j.at("dim").get<int>();
    for (const auto& jl : j.at("levels")) {
        GaussChaosFunctional::Level l;
        l.p = jl.at("p").get<int>();
        l.kernel = jl.at("kernel").get<std::vector<double>>();
        F.levels.push_back(std::move(l));
    }
    F.validate();
    return F;
}

PoissonChaosFunctional load_poisson_functional(const json& j) {
    PoissonSpace space;
    space.mu = j.at("mu").get<std::vector<double>>();
    space.validate();
    if (j.contains("name")) {
        const std::string name = j.at("name").get<std::string>();
        if (name == "indicator")
            return poisson_indicator(space, j.at("cells").get<int>(),
                                     j.value("coef", 1.0));
        if (name == "offdiag") return poisson_offdiag_constant(space, j.at("value").get<double>());
        throw config_error("unknown poisson kernel family: " + name);
    }
    PoissonChaosFunctional F;
    F.space = space;
    for (const auto& jl : j.at("levels")) {
        PoissonChaosFunctional::Level l;
        l.p = jl.at("p").get<int>();
        l.kernel = jl.at("kernel").get<std::vector<double>>();
        F.levels.push_back(std::move(l));
    }
    F.validate();
    return F;
}

std::vector<double> read_samples(const std::string& path) {
    const bool binary = path.size() > 4 && (path.substr(path.size() - 4) == ".bin" ||
                                            path.substr(path.size() - 4) == ".f64");
    std::vector<double> out;
    if (binary) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw config_error("cannot open sample file: " + path);
        double v;
        while (in.read(reinterpret_cast<char*>(&v), sizeof(v))) out.push_back(v);
        return out;
    }
    std::ifstream in(path);
    if (!in) throw config_error("cannot open sample file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            out.push_back(std::stod(tok));
        }
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

json report_envelope(const std::string& command, const json& config, std::uint64_t seed) {
    json rep;
    rep["schema"] = kSchemaVersion;
    rep["version"] = kLibraryVersion;
    rep["command"] = command;
    rep["seed"] = seed;
    rep["config"] = config;
    return rep;
}

json bound_report_to_json(const BoundReport& rep) {
    json out;
    out["function"] = rep.function_name;
    out["measured"] = rep.measured;
    out["theorem"] = rep.theorem;
    out["margin"] = rep.margin;
    out["slack"] = rep.slack;
    out["pass"] = rep.pass;
    return out;
}

json pair_stats_to_json(const ExchangeablePairStats& st) {
    json out;
    out["lambda"] = st.lambda_pair;
    out["nu"] = st.nu;
    out["var_S"] = st.var_S;
    out["e_S"] = st.e_S;
    out["e_abs_S"] = st.e_abs_S;
    out["e_dW2"] = st.e_dW2;
    out["e_abs_dW3"] = st.e_abs_dW3;
    out["e_dW4"] = st.e_dW4;
    out["m2"] = st.m2;
    out["m3"] = st.m3;
    out["m4"] = st.m4;
    out["r_zero"] = st.r_zero;
    out["exact"] = st.exact;
    if (!st.stderrs.empty()) out["stderr"] = st.stderrs;
    return out;
}

json dejong_bound_to_json(const DeJongBound& b) {
    json out;
    out["moment_functional"] = b.moment_functional;
    out["moment_term"] = b.moment_term;
    out["rho_term"] = b.rho_term;
    out["total"] = b.total;
    out["exact_variant_total"] = b.exact_variant_total;
    out["rho_term_pair4"] = b.rho_term_pair4;
    out["total_pair4"] = b.total_pair4;
    out["rho2"] = b.rho2;
    out["bigD"] = b.bigD;
    out["quad_sum"] = b.quad_sum;
    out["total_without_D"] = b.total_without_D;
    return out;
}

json demo_rows_to_json(const std::vector<DemoRow>& rows) {
    json arr = json::array();
    for (const DemoRow& r : rows) {
        json row;
        row["n"] = r.n;
        row["moment_discrepancy"] = r.moment_discrepancy;
        row["rho2"] = r.rho2;
        row["bigD"] = r.bigD;
        row["bound"] = r.bound;
        row["exact_variant"] = r.exact_variant;
        row["emp_d2"] = r.emp_d2;
        row["emp_d1"] = r.emp_d1;
        row["exact"] = r.exact;
        arr.push_back(row);
    }
    return arr;
}

std::string demo_rows_to_csv(const std::vector<DemoRow>& rows) {
    std::string out = "n,moment_discrepancy,rho2,bigD,bound,exact_variant,emp_d2,emp_d1\n";
    for (const DemoRow& r : rows) {
        out += std::to_string(r.n);
        for (double v : {r.moment_discrepancy, r.rho2, r.bigD, r.bound, r.exact_variant,
                         r.emp_d2, r.emp_d1}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

void write_text(const std::string& path_or_dash, const std::string& content) {
    if (path_or_dash == "-" || path_or_dash.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path_or_dash, std::ios::binary);
    if (!out) throw config_error("cannot open output file: " + path_or_dash);
    out << content;
}

}  // namespace gstein::io
