#include "binls/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace binls {

void GridSpec::validate() const {
    if (dimension < 1 || dimension > 3)
        throw std::invalid_argument("GridSpec: dimension must be 1, 2 or 3");
    if (points_per_axis < 8 || (points_per_axis & (points_per_axis - 1)) != 0)
        throw std::invalid_argument("GridSpec: points_per_axis must be a power of two >= 8");
    if (!(box_length > 0.0) || !std::isfinite(box_length))
        throw std::invalid_argument("GridSpec: box_length must be positive and finite");
}

std::size_t GridSpec::total_points() const {
    std::size_t t = 1;
    for (int a = 0; a < dimension; ++a) t *= static_cast<std::size_t>(points_per_axis);
    return t;
}

double GridSpec::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dimension; ++a) v *= spacing();
    return v;
}

bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.dimension == b.dimension && a.points_per_axis == b.points_per_axis &&
           a.box_length == b.box_length;
}

RealField::RealField(const GridSpec& g) : grid(g), samples(g.total_points(), 0.0) {
    g.validate();
}

bool all_finite(const RealField& f) {
    for (double s : f.samples)
        if (!std::isfinite(s)) return false;
    return true;
}

std::array<int, 3> unflatten(const GridSpec& g, std::size_t flat) {
    std::array<int, 3> idx{0, 0, 0};
    const int n = g.points_per_axis;
    for (int a = g.dimension - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % n);
        flat /= n;
    }
    return idx;
}

namespace {

using CVec = std::vector<std::complex<double>>;

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
};

// FFTW plan creation mutates global planner state and is not thread-safe;
// executing a cached plan on distinct arrays is. Plans are keyed by shape only
// (box_length does not enter the transform), created once, never destroyed.
PlanPair plans_for(const GridSpec& g) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, PlanPair> cache;
    std::scoped_lock lock(mutex);
    auto key = std::make_pair(g.dimension, g.points_per_axis);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    std::vector<int> dims(g.dimension, g.points_per_axis);
    CVec buf(g.total_points());
    auto* ptr = reinterpret_cast<fftw_complex*>(buf.data());
    PlanPair p;
    // FFTW_UNALIGNED keeps the plan valid for any later buffer.
    p.forward = fftw_plan_dft(g.dimension, dims.data(), ptr, ptr, FFTW_FORWARD,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.inverse = fftw_plan_dft(g.dimension, dims.data(), ptr, ptr, FFTW_BACKWARD,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p.forward || !p.inverse) throw std::runtime_error("fftw plan creation failed");
    cache.emplace(key, p);
    return p;
}

void forward_fft(const GridSpec& g, CVec& data) {
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plans_for(g).forward, ptr, ptr);
}

void inverse_fft_unscaled(const GridSpec& g, CVec& data) {
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plans_for(g).inverse, ptr, ptr);
}

// Signed wavenumber 2*pi*k/L for DFT bin i, k in [-n/2, n/2).
double wavenumber(int i, int n, double L) {
    const int k = (i < n / 2) ? i : i - n;
    return 2.0 * M_PI * k / L;
}

// Visit every mode with its |xi|^2.
template <typename Fn>
void for_each_mode(const GridSpec& g, Fn&& fn) {
    const int n = g.points_per_axis;
    std::vector<double> xisq(n);
    for (int i = 0; i < n; ++i) {
        const double w = wavenumber(i, n, g.box_length);
        xisq[i] = w * w;
    }
    switch (g.dimension) {
        case 1:
            for (int i = 0; i < n; ++i) fn(static_cast<std::size_t>(i), xisq[i]);
            break;
        case 2: {
            std::size_t flat = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j, ++flat) fn(flat, xisq[i] + xisq[j]);
            break;
        }
        default: {
            std::size_t flat = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k, ++flat) fn(flat, xisq[i] + xisq[j] + xisq[k]);
            break;
        }
    }
}

CVec to_complex(const RealField& f) {
    CVec z(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) z[i] = f.samples[i];
    return z;
}

// Apply a real multiplier m(|xi|^2) in Fourier space; output is real to round-off.
template <typename Mult>
RealField apply_multiplier(const RealField& f, Mult&& m) {
    f.grid.validate();
    CVec z = to_complex(f);
    forward_fft(f.grid, z);
    for_each_mode(f.grid, [&](std::size_t flat, double xisq) { z[flat] *= m(xisq); });
    inverse_fft_unscaled(f.grid, z);
    RealField out(f.grid);
    const double scale = 1.0 / static_cast<double>(f.grid.total_points());
    for (std::size_t i = 0; i < z.size(); ++i) out.samples[i] = z[i].real() * scale;
    return out;
}

}  // namespace

double mass(const RealField& f) {
    double acc = 0.0;
    for (double s : f.samples) acc += s * s;
    return acc * f.grid.cell_volume();
}

double lp_norm(const RealField& f, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("lp_norm: p must exceed 1");
    double acc = 0.0;
    for (double s : f.samples) acc += std::pow(std::abs(s), p);
    return std::pow(acc * f.grid.cell_volume(), 1.0 / p);
}

SpectralMoments spectral_moments(const RealField& f) {
    f.grid.validate();
    CVec z = to_complex(f);
    forward_fft(f.grid, z);
    SpectralMoments m;
    for_each_mode(f.grid, [&](std::size_t flat, double xisq) {
        const double a = std::norm(z[flat]);
        m.mass += a;
        m.grad += xisq * a;
        m.bih += xisq * xisq * a;
    });
    const double scale = f.grid.cell_volume() / static_cast<double>(f.grid.total_points());
    m.mass *= scale;
    m.grad *= scale;
    m.bih *= scale;
    return m;
}

double gradient_norm_sq(const RealField& f) { return spectral_moments(f).grad; }

double laplacian_norm_sq(const RealField& f) { return spectral_moments(f).bih; }

double shifted_laplacian_norm_sq(const RealField& f, double alpha) {
    f.grid.validate();
    CVec z = to_complex(f);
    forward_fft(f.grid, z);
    double acc = 0.0;
    for_each_mode(f.grid, [&](std::size_t flat, double xisq) {
        const double w = xisq - 0.5 * alpha;
        acc += w * w * std::norm(z[flat]);
    });
    return acc * f.grid.cell_volume() / static_cast<double>(f.grid.total_points());
}

RealField apply_laplacian(const RealField& f) {
    return apply_multiplier(f, [](double xisq) { return -xisq; });
}

RealField apply_bilaplacian(const RealField& f) {
    return apply_multiplier(f, [](double xisq) { return xisq * xisq; });
}

RealField apply_fourth_order(const RealField& f, double alpha) {
    return apply_multiplier(f, [alpha](double xisq) { return xisq * xisq - alpha * xisq; });
}

RealField apply_shifted_laplacian_sq(const RealField& f, double alpha) {
    return apply_multiplier(f, [alpha](double xisq) {
        const double w = xisq - 0.5 * alpha;
        return w * w;
    });
}

RealField apply_inverse_fourth_order(const RealField& f) {
    return apply_multiplier(f, [](double xisq) { return 1.0 / (1.0 + xisq * xisq); });
}

RealField apply_gn_resolvent(const RealField& f, double c0, double c4) {
    if (!(c0 > 0.0) || !(c4 > 0.0))
        throw std::invalid_argument("apply_gn_resolvent: coefficients must be positive");
    return apply_multiplier(
        f, [c0, c4](double xisq) { return 1.0 / (c0 + c4 * xisq * xisq); });
}

RealField dilate(const RealField& f, double s) {
    RealField out = f;
    if (s == 0.0) return out;
    out.grid.box_length = f.grid.box_length * std::exp(-s);
    const double amp = std::exp(0.5 * f.grid.dimension * s);
    for (double& v : out.samples) v *= amp;
    return out;
}

RealField dilation_generator(const RealField& f) {
    const GridSpec& g = f.grid;
    g.validate();
    const int n = g.points_per_axis;
    RealField out(g);
    for (std::size_t i = 0; i < f.size(); ++i)
        out.samples[i] = 0.5 * g.dimension * f.samples[i];

    // Per-axis stride for row-major layout, axis 0 slowest.
    for (int axis = 0; axis < g.dimension; ++axis) {
        std::size_t stride = 1;
        for (int a = axis + 1; a < g.dimension; ++a) stride *= n;

        CVec z = to_complex(f);
        forward_fft(g, z);
        for (std::size_t flat = 0; flat < z.size(); ++flat) {
            const int i = static_cast<int>((flat / stride) % n);
            // Nyquist derivative zeroed: keeps d/dx skew-adjoint on real fields.
            const double xi = (i == n / 2) ? 0.0 : wavenumber(i, n, g.box_length);
            z[flat] *= std::complex<double>(0.0, xi);
        }
        inverse_fft_unscaled(g, z);
        const double scale = 1.0 / static_cast<double>(g.total_points());
        for (std::size_t flat = 0; flat < z.size(); ++flat) {
            const int i = static_cast<int>((flat / stride) % n);
            out.samples[flat] += g.coordinate(i) * z[flat].real() * scale;
        }
    }
    return out;
}

double inner(const RealField& a, const RealField& b) {
    if (!a.grid.same_shape(b.grid))
        throw std::invalid_argument("inner: fields live on different grids");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a.samples[i] * b.samples[i];
    return acc * a.grid.cell_volume();
}

}  // namespace binls
