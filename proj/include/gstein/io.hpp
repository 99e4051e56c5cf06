#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "gstein/dejong.hpp"
#include "gstein/hoeffding.hpp"
#include "gstein/malliavin_gauss.hpp"
#include "gstein/malliavin_poisson.hpp"
#include "gstein/stein_core.hpp"

namespace gstein::io {

inline constexpr const char* kSchemaVersion = "gstein.report/1";
inline constexpr const char* kLibraryVersion = "0.1.0";

// Factors/probabilities, e.g.
//   {"factors": [{"values": [-1, 1], "probs": [0.5, 0.5]}, ...], "cap": 2000000}
DiscreteProductSpace load_product_space(const nlohmann::json& j);

// Kernel over a space: {"type": "table", "values": [...]} (mixed radix,
// coordinate 0 fastest) — or a named family resolved by load_kernel_instance.
UStatKernel load_table_kernel(const nlohmann::json& j, const DiscreteProductSpace& s);

// Either {"family": "rademacher-quadratic", "n": 8, "nu": 1, "seed": 0}
// or {"space": {...}, "kernel": {"type": "table", ...}, "d": 2, "nu": 0.5}.
KernelInstance load_kernel_instance(const nlohmann::json& j);

// {"name": "identity_nu", "nu": 3} | {"name": "perturbed", "nu": 2, "eps": 0.1}
// | {"name": "eigs", "eigs": [...]} | {"dim": k, "levels": [{"p":..,"kernel":[..]}]}
GaussChaosFunctional load_gauss_functional(const nlohmann::json& j);

// {"mu": [...], "name": "indicator", "cells": 5, "coef": 2.0}
// | {"mu": [...], "name": "offdiag", "value": 0.2}
// | {"mu": [...], "levels": [{"p":..,"kernel":[..]}]}
PoissonChaosFunctional load_poisson_functional(const nlohmann::json& j);

// One value per line (CSV single column), or raw little-endian doubles when
// the path ends in .bin or .f64.
std::vector<double> read_samples(const std::string& path);

// Deterministic report envelope: schema, version, command, seed, config echo.
nlohmann::json report_envelope(const std::string& command, const nlohmann::json& config,
                               std::uint64_t seed);

nlohmann::json bound_report_to_json(const BoundReport& rep);
nlohmann::json pair_stats_to_json(const ExchangeablePairStats& st);
nlohmann::json dejong_bound_to_json(const DeJongBound& b);
nlohmann::json demo_rows_to_json(const std::vector<DemoRow>& rows);

// Fixed columns: n,moment_discrepancy,rho2,bigD,bound,exact_variant,emp_d2,emp_d1.
std::string demo_rows_to_csv(const std::vector<DemoRow>& rows);

// "-" writes to stdout.
void write_text(const std::string& path_or_dash, const std::string& content);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace gstein::io
