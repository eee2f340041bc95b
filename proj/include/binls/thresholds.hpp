#pragma once

#include <cstdint>
#include <optional>

#include "binls/model.hpp"

namespace binls {

struct CriticalExponents {
    double r_bar;          // 2 + 8/N
    double two_star_star;  // 2N/(N-4) for N >= 5, +inf otherwise
};
CriticalExponents critical_exponents(int dimension);

// N(r-2)/(4r); requires 2 < r < 2**.
double gamma_exponent(int dimension, double r);

// max{4, 2 + 8/(N+1)} <= r <= 2 + 8/N.
bool borderline_check(int dimension, double r);

struct GnEstimate {
    double c_gn = 0.0;   // best quotient found; a lower bound of the optimal constant
    RealField extremal;  // maximizing profile, unit mass
    bool converged = false;
    int iterations = 0;
};

// Maximizes ||u||_r / (||u||_2^{1-g} ||lap u||_2^g) by preconditioned ascent
// from a Gaussian seed.
// tol is the relative gain over a 25-iteration window below which the
// iteration is declared converged.
GnEstimate gn_constant_estimate(int dimension, double r, const GridSpec& grid,
                                double tol = 1e-8, int max_iters = 5000);

struct ThresholdSet {
    double gamma_r = 0.0;
    double r_bar = 0.0;
    double two_star_star = 0.0;
    double c_gn = 0.0;
    double d1 = 0.0;  // (r1/r)^r1 (r2/r)^r2 c_gn^r
    double d2 = 0.0;  // max{alpha1, alpha2}
    std::optional<double> c_star;        // defined only for r > r_bar
    std::optional<double> c_lower_star;  // defined only for r > r_bar
    double mass_critical_cap = 0.0;      // (1/(2 d1 beta))^{N/8}
    std::optional<double> r_estimate;    // filled by estimate_R
    bool r_diverging = false;
    std::optional<double> rho_star_estimate;
};

// Closed-form thresholds from the system parameters and a GN constant estimate.
ThresholdSet thresholds(const SystemParams& params, double c_gn);

// Checked accessors; throw std::domain_error when r <= r_bar.
double c_star_value(const ThresholdSet& t);
double c_lower_star_value(const ThresholdSet& t);

struct REstimate {
    double value = 0.0;   // lower bound of the quotient supremum
    bool diverging = false;  // evidence-only flag from the width/box sweep
};

// Maximizes Q by ascent from Gaussian, wave-packet and extremal-derived seeds;
// requires 2 < r <= r_bar. When gn_extremal is null a fresh estimate is made.
REstimate estimate_R(const SystemParams& params, const GridSpec& grid, int restarts,
                     std::uint64_t seed, const RealField* gn_extremal = nullptr);

// (1/(2 beta R))^{1/(r-2)}.
double rho_star_from_R(const SystemParams& params, double r_estimate);

}  // namespace binls
