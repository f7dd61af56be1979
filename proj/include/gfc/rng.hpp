// Seeded random streams with a fixed derivation rule, so that parallel
// trials draw from independent, reproducible generators.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gfc::rng {

/// One round of the splitmix64 output function (Steele/Lea/Flood).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stream derivation rule: the generator for (seed, purpose, index) is a
/// mt19937_64 seeded with splitmix64(splitmix64(splitmix64(seed) ^ purpose) ^ index).
/// Any two distinct (seed, purpose, index) triples give unrelated streams, so
/// trials may run concurrently and still reproduce bit-for-bit.
enum class Purpose : std::uint64_t {
    SampleGraph = 0x5A01,
    Signals = 0x5A02,
    KMeans = 0x5A03,
    Generic = 0x5A04,
};

class Stream {
public:
    Stream(std::uint64_t seed, Purpose purpose, std::uint64_t index = 0)
        : gen_(splitmix64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(purpose)) ^ index)) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1). 53-bit resolution; stable across platforms
    /// because mt19937_64's output sequence is pinned by the standard.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; used where log(u) must be finite.
    double uniform_open() { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via Box-Muller on the uniform stream.
    double gauss() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Uniform integer in [0, bound) by rejection, bias-free.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x = gen_();
        while (x >= limit) x = gen_();
        return x % bound;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace gfc::rng
