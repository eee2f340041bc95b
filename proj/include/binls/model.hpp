#pragma once

#include "binls/grid.hpp"
#include "binls/spectral.hpp"

namespace binls {

// Parameters of the coupled system. rho is the square root of the
// prescribed total mass rho^2 shared by both components.
struct SystemParams {
    int dimension = 1;  // N
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    double beta = 1.0;
    double r1 = 2.0;
    double r2 = 2.0;
    double rho = 1.0;

    double r() const { return r1 + r2; }
    double gamma_r() const;  // N(r-2)/(4r)
    double r_bar() const { return 2.0 + 8.0 / dimension; }
    // 2N/(N-4) for N >= 5, +inf otherwise.
    double two_star_star() const;
    double mass_target() const { return rho * rho; }
    double alpha_max() const { return alpha1 > alpha2 ? alpha1 : alpha2; }
    void validate() const;  // throws std::invalid_argument
};

// The coupled state; both components share one grid and one mass constraint.
struct StatePair {
    RealField u, v;
    const GridSpec& grid() const { return u.grid; }
};

double total_mass(const StatePair& p);

// The three dilation-homogeneous blocks of the energy:
// bih = |lap u|^2 + |lap v|^2, grad = a1 |grad u|^2 + a2 |grad v|^2,
// coupling = integral of |u|^r1 |v|^r2.
struct EnergyTerms {
    double bih = 0.0;
    double grad = 0.0;
    double coupling = 0.0;
};
EnergyTerms energy_terms(const StatePair& p, const SystemParams& params);

double coupling_integral(const StatePair& p, const SystemParams& params);
double energy_I(const StatePair& p, const SystemParams& params);
double energy_J(const StatePair& p, const SystemParams& params);
// Infimum of J on the constraint sphere: -max(a1^2, a2^2) rho^2 / 8.
double mj_value(const SystemParams& params);

// Coupling-to-shifted-operator quotient; the a1 >= a2 convention is realized
// by relabeling internally, inputs are never mutated. Throws on a zero pair.
double quotient_Q(const StatePair& p, const SystemParams& params);
// H = I - m^J. On the sphere H = (1/2) D (1 - 2 beta rho^{r-2} Q) with D the
// quotient denominator core.
double gap_H(const StatePair& p, const SystemParams& params);

double pohozaev_P(const StatePair& p, const SystemParams& params);
StatePair l2_gradient_I(const StatePair& p, const SystemParams& params);
// Second variation of I applied to a direction (exact, matrix-free).
StatePair hessian_I_apply(const StatePair& p, const StatePair& w,
                          const SystemParams& params);
double multiplier_estimate(const StatePair& p, const SystemParams& params);
double pohozaev_identity_residual(const StatePair& p, const SystemParams& params, double lambda);
double euler_lagrange_residual(const StatePair& p, const SystemParams& params, double lambda);

// Closed-form energy along the dilation fiber and its s-derivative
// (the derivative equals the Pohozaev functional of the dilated pair).
double psi_value(const EnergyTerms& t, const SystemParams& params, double s);
double psi_derivative(const EnergyTerms& t, const SystemParams& params, double s);

// Pair algebra over the shared quadrature inner product.
double inner(const StatePair& a, const StatePair& b);
StatePair scaled(const StatePair& p, double c);
StatePair axpy(double a, const StatePair& x, const StatePair& y);  // a*x + y
StatePair dilate_pair(const StatePair& p, double s);

}  // namespace binls
