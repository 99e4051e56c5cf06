#pragma once

#include <map>
#include <string>

namespace gstein {

// Moments of an exchangeable pair (W, W') built from single-coordinate
// replacement, together with the regression remainder statistics.
struct ExchangeablePairStats {
    double lambda_pair = 0.0;  // d / n
    double nu = 0.0;

    double var_S = 0.0;
    double e_S = 0.0;       // exactly 0 in exact mode (plug-in hypothesis)
    double e_abs_S = 0.0;
    double e_abs_R = 0.0;  // identically 0 for the replacement coupling

    double e_dW2 = 0.0;      // E[(W'-W)^2]
    double e_abs_dW3 = 0.0;  // E|W'-W|^3
    double e_dW4 = 0.0;      // E[(W'-W)^4]

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;  // moments of W

    bool r_zero = false;   // regression identity holds with R = 0
    bool exact = true;     // exact enumeration vs Monte Carlo
    // Standard errors (batch means) for MC mode, keyed by field name.
    std::map<std::string, double> stderrs;
};

}  // namespace gstein
