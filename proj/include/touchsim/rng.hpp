#pragma once

// Deterministic random-number plumbing. Distribution sampling is done by
// hand on top of mt19937_64 because libstdc++'s distribution objects do not
// promise identical streams across versions, and byte-stable reports need
// reproducible draws.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace touchsim {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive an independent stream seed from (seed, tag). Tags keep the module's
// sub-streams (event times vs. moves vs. fill coins) decoupled so adding a
// draw in one place does not shift another.
inline std::uint64_t sub_seed(std::uint64_t seed, std::string_view tag) {
    std::uint64_t h = splitmix64(seed ^ 0x51ed27f4a1c9b3d5ULL);
    for (char c : tag)
        h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // Exponential with the given rate; log1p keeps small draws accurate.
    double exponential(double rate) {
        return -std::log1p(-uniform()) / rate;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

// Snap a timestamp to the nanosecond lattice so text serialization with nine
// fractional digits loses nothing.
inline double quantize_time_ns(double t_s) {
    return std::nearbyint(t_s * 1e9) / 1e9;
}

}  // namespace touchsim
