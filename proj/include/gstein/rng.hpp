#pragma once

#include <cmath>
#include <cstdint>

namespace gstein {

// Counter-based generator: every (seed, stream) pair yields an independent
// deterministic substream, so Monte Carlo runs are reproducible no matter how
// samples are distributed over threads.
class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : state_(mix(seed + 0x9e3779b97f4a7c15ULL * (stream + 1))) {
        state_ = mix(state_ ^ 0xbf58476d1ce4e5b9ULL);
    }

    std::uint64_t next_u64() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // Uniform in (0,1]; never returns 0 so logs are safe.
    double uniform() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the paired draw is cached.
    double normal() noexcept {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double rad = std::sqrt(-2.0 * std::log(u1));
        double ang = 6.283185307179586476925286766559 * u2;
        cached_ = rad * std::sin(ang);
        have_cached_ = true;
        return rad * std::cos(ang);
    }

    // Marsaglia-Tsang squeeze for shape >= 1, boosting for shape < 1. Rate 1.
    double gamma(double shape) noexcept {
        if (shape < 1.0) {
            double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform();
            double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Knuth multiplication method; adequate for the desk-scale means used here.
    long poisson(double mu) noexcept {
        if (mu <= 0.0) return 0;
        // Split large means so exp(-mu) stays representable.
        long total = 0;
        while (mu > 500.0) {
            total += poisson(500.0);
            mu -= 500.0;
        }
        const double limit = std::exp(-mu);
        double prod = uniform();
        long k = 0;
        while (prod > limit) {
            prod *= uniform();
            ++k;
        }
        return total + k;
    }

  private:
    static std::uint64_t mix(std::uint64_t z) noexcept {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace gstein
