#pragma once

#include "binls/grid.hpp"

namespace binls {

// L^2 quantities of one field read off a single transform:
// mass = ||f||_2^2, grad = ||grad f||_2^2, bih = ||lap f||_2^2.
struct SpectralMoments {
    double mass = 0.0;
    double grad = 0.0;
    double bih = 0.0;
};

double mass(const RealField& f);               // physical-space quadrature
double lp_norm(const RealField& f, double p);  // physical-space quadrature, p > 1

SpectralMoments spectral_moments(const RealField& f);
double gradient_norm_sq(const RealField& f);
double laplacian_norm_sq(const RealField& f);

// ||(lap + alpha/2) f||_2^2, Fourier multiplier (|xi|^2 - alpha/2)^2.
double shifted_laplacian_norm_sq(const RealField& f, double alpha);

RealField apply_laplacian(const RealField& f);    // multiplier -|xi|^2
RealField apply_bilaplacian(const RealField& f);  // multiplier |xi|^4
// lap^2 f + alpha * lap f in one transform pair.
RealField apply_fourth_order(const RealField& f, double alpha);
// (lap + alpha/2)^2 f, multiplier (|xi|^2 - alpha/2)^2.
RealField apply_shifted_laplacian_sq(const RealField& f, double alpha);
// (1 + |xi|^4)^{-1} f; the optional descent preconditioner.
RealField apply_inverse_fourth_order(const RealField& f);
// (c0 + c4 |xi|^4)^{-1} f with c0, c4 > 0.
RealField apply_gn_resolvent(const RealField& f, double c0, double c4);

// Exact mass-preserving dilation (s*f)(x) = e^{Ns/2} f(e^s x):
// samples scaled by e^{Ns/2}, box length replaced by e^{-s} L.
RealField dilate(const RealField& f, double s);

// Generator of the dilation group at s = 0: (N/2) f + x . grad f.
// The gradient is spectral with the Nyquist mode zeroed (odd-order operator).
RealField dilation_generator(const RealField& f);

// Quadrature inner product sum(a_i b_i) h^N; fields must share the grid shape.
double inner(const RealField& a, const RealField& b);

}  // namespace binls
