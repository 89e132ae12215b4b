#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace kcp {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derives a replication seed from (master, a, b). Fixed mixing function so
/// that extending a grid or adding repetitions never perturbs existing draws.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = master;
    s = splitmix64(s) ^ (a * 0xD1342543DE82EF95ull);
    s = splitmix64(s) ^ (b * 0x9E6C63D0876A9A35ull);
    return splitmix64(s);
}

/// Seeded random source. The engine is mt19937_64 (output fully specified by
/// the standard) and the distributions are generated from raw 64-bit words,
/// so identical seeds give identical streams on every platform.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1]; safe as a log() argument.
    double uniform01_positive() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Standard normal via Box-Muller (cosine branch only).
    double normal() {
        const double u1 = uniform01_positive();
        const double u2 = uniform01();
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Uniform integer in [0, n). Modulo bias is irrelevant at the sizes used.
    std::size_t below(std::size_t n) {
        return static_cast<std::size_t>(engine_() % n);
    }

    bool coin() { return (engine_() & 1ull) != 0; }

private:
    std::mt19937_64 engine_;
};

}  // namespace kcp
