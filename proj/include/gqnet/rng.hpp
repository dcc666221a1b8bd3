#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace gqnet {

/// SplitMix64 stream (Steele, Lea, Flood 2014). Chosen because the algorithm
/// is fully specified by the two mixing constants below, so a seed reproduces
/// the same draws in any implementation of this format.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller on explicit uniforms (pair cached).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Standard Cauchy via the inverse CDF.
    double next_cauchy() {
        double u = next_double();
        while (u <= 0.0 || u >= 1.0) u = next_double();
        return std::tan(std::numbers::pi * (u - 0.5));
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Mix (base_seed, stream_index) into one 64-bit seed so every replication
/// owns an isolated stream.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t stream_index) {
    SplitMix64 mixer(base_seed ^ (stream_index * 0xD1B54A32D192ED03ULL));
    mixer.next_u64();
    return mixer.next_u64();
}

/// Inverse standard normal CDF, Acklam's rational approximation with one
/// Halley refinement step (relative error far below 1e-12 after refinement).
double inverse_normal_cdf(double prob);

}  // namespace gqnet
