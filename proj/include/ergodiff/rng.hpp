#pragma once

#include <cmath>
#include <cstdint>

namespace ergodiff {

/// Counter-style seedable generator (splitmix64 core). Each Monte Carlo
/// replicate gets its own stream via substream_seed(master, index); splitmix64
/// is a bijection on uint64, so distinct indices never collide.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed), has_spare_(false), spare_(0.0) {
        // Decorrelate trivially related seeds (0, 1, 2, ...).
        next_u64();
        next_u64();
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on (0,1), never exactly 0 or 1.
    double uniform01() {
        const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return u == 0.0 ? 0x1.0p-54 : u;
    }

    /// Standard normal via the Marsaglia polar method (one spare cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        has_spare_ = true;
        return u * factor;
    }

    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    /// Stream seed for replicate `index` of a study with the given master seed.
    /// mix() is bijective, hence seeds are distinct for distinct indices.
    static std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
        return mix(mix(master) + index);
    }

private:
    std::uint64_t state_;
    bool has_spare_;
    double spare_;
};

} // namespace ergodiff
