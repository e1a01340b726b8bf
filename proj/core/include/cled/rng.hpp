#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cled {

/// splitmix64 step. Used both as a standalone mixer and as the documented
/// seed-splitting rule for campaigns and forests: independent work items
/// (trials, trees, folds) draw their seeds as derive_seed(root, index), so
/// results do not depend on execution order or thread count.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
    return splitmix64(root ^ splitmix64(index + 1));
}

/// Deterministic RNG for all seeded operations. mt19937_64 is pinned by the
/// C++ standard, so identical seeds give identical streams on every platform.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of the engine output.
inline double next_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). n must be > 0.
inline std::uint64_t next_below(Rng& rng, std::uint64_t n) {
    // Rejection sampling keeps the distribution exactly uniform.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = rng();
    while (v >= limit) {
        v = rng();
    }
    return v % n;
}

/// Standard normal via Box-Muller. Kept hand-rolled because
/// std::normal_distribution is implementation-defined and would break
/// bit-identical weight initialization across standard libraries.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = next_unit(rng_);
        double u2 = next_unit(rng_);
        while (u1 <= 0.0) {
            u1 = next_unit(rng_);
        }
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    Rng rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace cled
