#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "binls/model.hpp"
#include "binls/thresholds.hpp"

namespace binls {

struct GeometryReport {
    bool feasible = false;  // beta rho^{r-2} < c_star, equivalently h(t_bar) > 0
    double R0 = 0.0;
    double R1 = 0.0;
    double t_bar = 0.0;  // maximizer of phi(t) = t/2 - d1 beta rho^{r(1-g)} t^{rg-1}
    double h_max = 0.0;  // h(t_bar)
};

// h(t) = t^2/2 - d2 rho t / 2 - d1 beta rho^{r(1-g)} t^{rg}; requires r > r_bar.
double geometry_h(double t, const SystemParams& params, const ThresholdSet& th);

// Closed-form t_bar plus bisection for the roots R0 < t_bar < R1 when the
// barrier exists; infeasibility is a result, not an error.
GeometryReport bracket_roots_h(const SystemParams& params, const ThresholdSet& th);

struct EndpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dilations of a coupled-Gaussian profile on the mass sphere: the first sits
// inside the barrier (bending < R0^2, I < 0), the second outside
// (bending > R1^2, I < 0); both verified numerically before return.
std::pair<StatePair, StatePair> build_endpoints(const SystemParams& params,
                                                const GridSpec& grid,
                                                const GeometryReport& geometry);

struct PathCritical {
    double s_star = 0.0;
    double value = 0.0;  // psi(s_star)
};

// Maximizes psi(s) = I(s * p) by bisecting its s-derivative (the Pohozaev
// functional of the dilated pair). Throws when P has no +/- crossing.
PathCritical dilation_path_critical(const StatePair& p, const SystemParams& params,
                                    double s_lo, double s_hi);

enum class SaddleProfile { CoupledGaussian, GnExtremal };

struct SaddleConfig {
    double el_tol = 1e-5;  // scaled by (1 + bending energy)
    double p_tol = 1e-5;   // scaled by (1 + bending energy)
    int max_outer = 1500;
    int descent_steps = 10;
    double step_init = 0.5;
    SaddleProfile profile = SaddleProfile::CoupledGaussian;
    std::uint64_t seed = 0;
};

struct SaddleReport {
    bool accepted = false;
    double level = 0.0;   // mountain-pass level candidate
    double lambda = 0.0;
    double pohozaev_residual = 0.0;  // P at the final state
    double el_residual = 0.0;
    double s_star = 0.0;  // cumulative dilation applied to the seed profile
    bool lambda_bound_ok = false;  // lambda > max{a1^2, a2^2}/4
    double bending = 0.0;          // |lap u|^2 + |lap v|^2 at the final state
    double coupling = 0.0;
    int iterations = 0;
    std::string failure;  // empty when accepted
    StatePair state;
};

// Alternating fiber maximization / orthogonal constrained descent.
// Precondition: beta rho^{r-2} < min{c_star, c_lower_star}.
SaddleReport saddle_search(const SystemParams& params, const GridSpec& grid,
                           const SaddleConfig& config, const ThresholdSet& th);

}  // namespace binls
