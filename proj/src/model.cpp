#include "binls/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace binls {

double SystemParams::gamma_r() const { return dimension * (r() - 2.0) / (4.0 * r()); }

double SystemParams::two_star_star() const {
    if (dimension >= 5) return 2.0 * dimension / (dimension - 4.0);
    return std::numeric_limits<double>::infinity();
}

void SystemParams::validate() const {
    if (dimension < 1) throw std::invalid_argument("params: dimension must be >= 1");
    if (!(alpha1 > 0.0) || !(alpha2 > 0.0) || !(beta > 0.0) || !(rho > 0.0))
        throw std::invalid_argument("params: alpha1, alpha2, beta, rho must be positive");
    if (!(r1 > 1.0) || !(r2 > 1.0))
        throw std::invalid_argument("params: r1 and r2 must exceed 1");
    if (!(r() < two_star_star()))
        throw std::invalid_argument("params: r1 + r2 must be below the Sobolev critical exponent");
}

namespace {

void require_same_grid(const StatePair& p) {
    if (!(p.u.grid == p.v.grid))
        throw std::invalid_argument("state pair: components live on different grids");
}

// |w|^{q-2} w with the continuous extension 0 at w = 0 (valid for q > 1).
inline double signed_power(double w, double q) {
    if (w == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(w), q - 1.0), w);
}

}  // namespace

double total_mass(const StatePair& p) {
    require_same_grid(p);
    return mass(p.u) + mass(p.v);
}

double coupling_integral(const StatePair& p, const SystemParams& params) {
    require_same_grid(p);
    double acc = 0.0;
    for (std::size_t i = 0; i < p.u.size(); ++i) {
        const double a = std::abs(p.u.samples[i]);
        const double b = std::abs(p.v.samples[i]);
        if (a == 0.0 || b == 0.0) continue;
        acc += std::pow(a, params.r1) * std::pow(b, params.r2);
    }
    return acc * p.u.grid.cell_volume();
}

EnergyTerms energy_terms(const StatePair& p, const SystemParams& params) {
    require_same_grid(p);
    const SpectralMoments mu = spectral_moments(p.u);
    const SpectralMoments mv = spectral_moments(p.v);
    EnergyTerms t;
    t.bih = mu.bih + mv.bih;
    t.grad = params.alpha1 * mu.grad + params.alpha2 * mv.grad;
    t.coupling = coupling_integral(p, params);
    return t;
}

double energy_I(const StatePair& p, const SystemParams& params) {
    const EnergyTerms t = energy_terms(p, params);
    return 0.5 * t.bih - 0.5 * t.grad - params.beta * t.coupling;
}

double energy_J(const StatePair& p, const SystemParams& params) {
    require_same_grid(p);
    const SpectralMoments mu = spectral_moments(p.u);
    const SpectralMoments mv = spectral_moments(p.v);
    return 0.5 * (mu.bih + mv.bih) - 0.5 * params.alpha1 * mu.grad -
           0.5 * params.alpha2 * mv.grad;
}

double mj_value(const SystemParams& params) {
    const double a = params.alpha_max();
    return -(a * a / 8.0) * params.mass_target();
}

namespace {

// Denominator core of Q under the a1 >= a2 labeling:
// |(lap + a1/2) u|^2 + |(lap + a2/2) v|^2 + ((a1^2 - a2^2)/4) |v|^2.
double q_denominator_core(const StatePair& p, const SystemParams& params) {
    const bool swap = params.alpha1 < params.alpha2;
    const RealField& first = swap ? p.v : p.u;
    const RealField& second = swap ? p.u : p.v;
    const double a1 = swap ? params.alpha2 : params.alpha1;
    const double a2 = swap ? params.alpha1 : params.alpha2;
    return shifted_laplacian_norm_sq(first, a1) + shifted_laplacian_norm_sq(second, a2) +
           0.25 * (a1 * a1 - a2 * a2) * mass(second);
}

}  // namespace

double quotient_Q(const StatePair& p, const SystemParams& params) {
    require_same_grid(p);
    const double m = total_mass(p);
    if (m <= 0.0) throw std::domain_error("quotient_Q: undefined for the zero pair");
    const double k = coupling_integral(p, params);
    const double d = q_denominator_core(p, params);
    return k / (d * std::pow(m, 0.5 * params.r() - 1.0));
}

double gap_H(const StatePair& p, const SystemParams& params) {
    return energy_I(p, params) - mj_value(params);
}

double pohozaev_P(const StatePair& p, const SystemParams& params) {
    const EnergyTerms t = energy_terms(p, params);
    return 2.0 * t.bih - t.grad -
           2.0 * params.beta * params.r() * params.gamma_r() * t.coupling;
}

StatePair l2_gradient_I(const StatePair& p, const SystemParams& params) {
    require_same_grid(p);
    StatePair g;
    g.u = apply_fourth_order(p.u, params.alpha1);
    g.v = apply_fourth_order(p.v, params.alpha2);
    const double br1 = params.beta * params.r1;
    const double br2 = params.beta * params.r2;
    for (std::size_t i = 0; i < p.u.size(); ++i) {
        const double u = p.u.samples[i];
        const double v = p.v.samples[i];
        const double au = std::abs(u);
        const double av = std::abs(v);
        if (au > 0.0 && av > 0.0) {
            g.u.samples[i] -= br1 * signed_power(u, params.r1) * std::pow(av, params.r2);
            g.v.samples[i] -= br2 * std::pow(au, params.r1) * signed_power(v, params.r2);
        }
    }
    return g;
}

StatePair hessian_I_apply(const StatePair& p, const StatePair& w,
                          const SystemParams& params) {
    require_same_grid(p);
    StatePair h;
    h.u = apply_fourth_order(w.u, params.alpha1);
    h.v = apply_fourth_order(w.v, params.alpha2);
    const double r1 = params.r1;
    const double r2 = params.r2;
    const double br1 = params.beta * r1;
    const double br2 = params.beta * r2;
    for (std::size_t i = 0; i < p.u.size(); ++i) {
        const double u = p.u.samples[i];
        const double v = p.v.samples[i];
        const double au = std::abs(u);
        const double av = std::abs(v);
        if (au == 0.0 || av == 0.0) continue;
        const double a = w.u.samples[i];
        const double b = w.v.samples[i];
        const double pu2 = std::pow(au, r1 - 2.0);  // |u|^{r1-2}
        const double pv2 = std::pow(av, r2 - 2.0);
        const double cross = pu2 * u * pv2 * v;  // |u|^{r1-2}u |v|^{r2-2}v
        h.u.samples[i] -= br1 * ((r1 - 1.0) * pu2 * pv2 * av * av * a + r2 * cross * b);
        h.v.samples[i] -= br2 * (r1 * cross * a + (r2 - 1.0) * pu2 * au * au * pv2 * b);
    }
    return h;
}

double multiplier_estimate(const StatePair& p, const SystemParams& params) {
    const double m = total_mass(p);
    if (m <= 0.0) throw std::domain_error("multiplier_estimate: zero pair");
    const EnergyTerms t = energy_terms(p, params);
    return (-t.bih + t.grad + params.beta * params.r() * t.coupling) / m;
}

double pohozaev_identity_residual(const StatePair& p, const SystemParams& params,
                                  double lambda) {
    const EnergyTerms t = energy_terms(p, params);
    const double n = params.dimension;
    return 0.5 * (n - 4.0) * t.bih - 0.5 * (n - 2.0) * t.grad +
           0.5 * n * lambda * total_mass(p) - n * params.beta * t.coupling;
}

double euler_lagrange_residual(const StatePair& p, const SystemParams& params,
                               double lambda) {
    const StatePair g = l2_gradient_I(p, params);
    double acc = 0.0;
    for (std::size_t i = 0; i < p.u.size(); ++i) {
        const double ru = g.u.samples[i] + lambda * p.u.samples[i];
        const double rv = g.v.samples[i] + lambda * p.v.samples[i];
        acc += ru * ru + rv * rv;
    }
    return std::sqrt(acc * p.u.grid.cell_volume());
}

double psi_value(const EnergyTerms& t, const SystemParams& params, double s) {
    return 0.5 * std::exp(4.0 * s) * t.bih - 0.5 * std::exp(2.0 * s) * t.grad -
           params.beta * std::exp(2.0 * params.r() * params.gamma_r() * s) * t.coupling;
}

double psi_derivative(const EnergyTerms& t, const SystemParams& params, double s) {
    const double rg = params.r() * params.gamma_r();
    return 2.0 * std::exp(4.0 * s) * t.bih - std::exp(2.0 * s) * t.grad -
           2.0 * params.beta * rg * std::exp(2.0 * rg * s) * t.coupling;
}

double inner(const StatePair& a, const StatePair& b) {
    return inner(a.u, b.u) + inner(a.v, b.v);
}

StatePair scaled(const StatePair& p, double c) {
    StatePair out = p;
    for (double& x : out.u.samples) x *= c;
    for (double& x : out.v.samples) x *= c;
    return out;
}

StatePair axpy(double a, const StatePair& x, const StatePair& y) {
    StatePair out = y;
    for (std::size_t i = 0; i < out.u.size(); ++i) out.u.samples[i] += a * x.u.samples[i];
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v.samples[i] += a * x.v.samples[i];
    return out;
}

StatePair dilate_pair(const StatePair& p, double s) {
    return StatePair{dilate(p.u, s), dilate(p.v, s)};
}

}  // namespace binls
