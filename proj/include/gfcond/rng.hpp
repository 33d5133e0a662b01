#ifndef GFCOND_RNG_HPP
#define GFCOND_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace gfcond {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seedable stream of independent substreams. Substream k is reproducible
/// independently of any other draw order, so batches can be partitioned
/// across workers by sample index and merged without affecting results.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    RngStream() = default;
    RngStream(std::uint64_t seed_, std::uint64_t stream_ = 0) : seed(seed_), stream(stream_) {}

    /// Derived stream for an independent purpose (one per module/criterion).
    RngStream substream(std::uint64_t k) const {
        return RngStream(seed, splitmix64(stream * 0x9E3779B97F4A7C15ULL + k + 1));
    }

    /// Engine for substream element `index`.
    std::mt19937_64 engine_at(std::uint64_t index) const {
        std::uint64_t s = splitmix64(splitmix64(seed ^ (0xA24BAED4963EE407ULL * (stream + 1))) + index);
        return std::mt19937_64(s);
    }
};

/// Uniform double in (0, 1]; never returns 0 so logs are safe.
inline double uniform_pos(std::mt19937_64& eng) {
    return (static_cast<double>(eng() >> 11) + 1.0) * (1.0 / 9007199254740992.0);
}

/// Uniform double in [0, 1).
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * (1.0 / 9007199254740992.0);
}

/// Standard real Gaussian (Box-Muller; one value per call, no cached spare,
/// which keeps draw sequences position-independent).
inline double normal(std::mt19937_64& eng) {
    double u1 = uniform_pos(eng);
    double u2 = uniform01(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

/// Standard complex Gaussian: E s = 0, E s^2 = 0, E|s|^2 = 1
/// (real and imaginary parts independent N(0, 1/2)).
inline std::complex<double> complex_normal(std::mt19937_64& eng) {
    double u1 = uniform_pos(eng);
    double u2 = uniform01(eng);
    double rad = std::sqrt(-std::log(u1));
    double th = 6.283185307179586476925286766559 * u2;
    return {rad * std::cos(th), rad * std::sin(th)};
}

/// Exponential with unit mean.
inline double exponential(std::mt19937_64& eng) { return -std::log(uniform_pos(eng)); }

}  // namespace gfcond

#endif
