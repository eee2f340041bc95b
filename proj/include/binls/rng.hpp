#pragma once

#include <cmath>
#include <cstdint>

namespace binls {

// Small deterministic generator (splitmix64). All randomness in the suite
// flows from one 64-bit seed so identical configs reproduce byte-identical
// output on a given platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Derive an independent stream for job `index` from this seed.
    static std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
        Rng r(seed ^ (0x6a09e667f3bcc909ULL + index * 0x3c6ef372fe94f82bULL));
        return r.next_u64();
    }

  private:
    std::uint64_t state_;
};

}  // namespace binls
