#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "binls/grid.hpp"
#include "binls/rng.hpp"

namespace binls {

// Profiles are centered at the box midpoint; widths should stay below ~L/6 so
// the periodic wrap-around is negligible.

inline RealField gaussian_profile(const GridSpec& g, double sigma) {
    return sample_function(g, [&](const std::array<double, 3>& x) {
        double r2 = 0.0;
        for (int a = 0; a < g.dimension; ++a) r2 += x[a] * x[a];
        return std::exp(-r2 / (sigma * sigma));
    });
}

// Snap a target wavenumber onto the grid: 2*pi*k/L with integer k, capped at n/4.
inline double nearest_mode_wavenumber(const GridSpec& g, double target) {
    const double step = 2.0 * M_PI / g.box_length;
    long k = std::lround(target / step);
    k = std::clamp<long>(k, 0, g.points_per_axis / 4);
    return k * step;
}

// Radial wave packet cos(k|x|) exp(-|x|^2/sigma^2). By default the carrier is
// snapped to the nearest grid mode (the right seed when a pure resolved mode
// is the target); with snap = false the exact carrier is kept, which the
// envelope makes admissible on the torus.
inline RealField modulated_profile(const GridSpec& g, double sigma, double carrier,
                                   bool snap = true) {
    const double k = snap ? nearest_mode_wavenumber(g, carrier) : carrier;
    return sample_function(g, [&](const std::array<double, 3>& x) {
        double r2 = 0.0;
        for (int a = 0; a < g.dimension; ++a) r2 += x[a] * x[a];
        return std::cos(k * std::sqrt(r2)) * std::exp(-r2 / (sigma * sigma));
    });
}

// Random superposition of low modes |k|_inf <= kmax with 1/(1+|k|^2) decay.
inline RealField random_bandlimited(const GridSpec& g, int kmax, std::uint64_t seed) {
    Rng rng(seed);
    RealField f(g);
    const int modes = 32;
    const double two_pi_over_l = 2.0 * M_PI / g.box_length;
    for (int m = 0; m < modes; ++m) {
        double kvec[3] = {0.0, 0.0, 0.0};
        double ksq = 0.0;
        for (int a = 0; a < g.dimension; ++a) {
            const int k = static_cast<int>(rng.uniform(0.0, kmax + 1.0));
            kvec[a] = k * two_pi_over_l;
            ksq += static_cast<double>(k) * k;
        }
        const double amp = rng.normal() / (1.0 + ksq);
        const double phase = rng.uniform(0.0, 2.0 * M_PI);
        std::size_t flat = 0;
        const int n = g.points_per_axis;
        std::array<int, 3> idx{0, 0, 0};
        for (flat = 0; flat < f.size(); ++flat) {
            std::size_t rem = flat;
            for (int a = g.dimension - 1; a >= 0; --a) {
                idx[a] = static_cast<int>(rem % n);
                rem /= n;
            }
            double arg = phase;
            for (int a = 0; a < g.dimension; ++a) arg += kvec[a] * g.coordinate(idx[a]);
            f.samples[flat] += amp * std::cos(arg);
        }
    }
    return f;
}

}  // namespace binls
