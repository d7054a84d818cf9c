#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace foam {

/// splitmix64: 64-bit counter generator (Steele, Lea & Flood 2014). Chosen
/// over std::mt19937 so traces are specified by algorithm and reproducible
/// across implementations, not tied to a library's stream.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit mantissa.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in {0, ..., n-1} by modulo (bias is negligible for desk-scale n).
    std::uint64_t next_below(std::uint64_t n) { return next() % n; }

    /// Standard normal via Box-Muller; one uniform pair yields two normals.
    double next_gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0,1]
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace foam
