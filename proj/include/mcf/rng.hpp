#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace mcf {

// Deterministic random stream. One master seed per run; substreams are derived
// by fixed string labels so any component can be reproduced in isolation.
//
// normal() draws two uniforms per call (no cached spare), so the draw sequence
// is a pure function of the call sequence.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    static std::uint64_t mix(std::uint64_t seed, std::string_view label) {
        // FNV-1a over the label, then splitmix64 finalizer.
        std::uint64_t h = 1469598103934665603ull;
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ull + h;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static Rng derive(std::uint64_t seed, std::string_view label) {
        return Rng(mix(seed, label));
    }

    Rng derive(std::string_view label) {
        return Rng(mix(gen_(), label));
    }

    // Uniform in [0, 1).
    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
    }

    // Standard normal via Box-Muller, stateless across calls.
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

}  // namespace mcf
