#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace binls {

// Uniform periodic grid on a cube of side L with n points per axis.
// Grid points along one axis sit at i*h - L/2 (centered coordinates),
// h = L/n; all quadrature uses the weight h^N.
struct GridSpec {
    int dimension = 1;        // N, supported 1..3
    int points_per_axis = 8;  // n, power of two, >= 8
    double box_length = 1.0;  // L, same on every axis

    void validate() const;  // throws std::invalid_argument on violation
    std::size_t total_points() const;
    double spacing() const { return box_length / points_per_axis; }
    double cell_volume() const;
    double coordinate(int i) const { return i * spacing() - 0.5 * box_length; }
    bool same_shape(const GridSpec& o) const {
        return dimension == o.dimension && points_per_axis == o.points_per_axis;
    }
};

bool operator==(const GridSpec& a, const GridSpec& b);

// Real-valued samples on a GridSpec, row-major with axis 0 slowest.
struct RealField {
    GridSpec grid;
    std::vector<double> samples;

    RealField() = default;
    explicit RealField(const GridSpec& g);

    std::size_t size() const { return samples.size(); }
    double& operator[](std::size_t i) { return samples[i]; }
    double operator[](std::size_t i) const { return samples[i]; }
};

bool all_finite(const RealField& f);

// Decode a flat row-major index into per-axis indices (unused axes 0).
std::array<int, 3> unflatten(const GridSpec& g, std::size_t flat);

// Sample fn at every grid point; fn receives the centered coordinates.
template <typename Fn>
RealField sample_function(const GridSpec& g, Fn&& fn) {
    g.validate();
    RealField f(g);
    const int n = g.points_per_axis;
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (std::size_t flat = 0; flat < f.size(); ++flat) {
        std::size_t rem = flat;
        for (int a = g.dimension - 1; a >= 0; --a) {
            x[a] = g.coordinate(static_cast<int>(rem % n));
            rem /= n;
        }
        f.samples[flat] = fn(x);
    }
    return f;
}

}  // namespace binls
