#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace washdet {

// SplitMix64 stream. Small state, solid diffusion, and identical output on
// every platform/compiler, which is what keeps reruns byte-identical.
// std::mt19937 + <random> distributions are avoided on purpose: the
// distributions are implementation-defined and would tie outputs to one
// standard library.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // unbiased integer in [0, n), n > 0 (Lemire multiply-shift)
    uint64_t below(uint64_t n) {
        uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<uint64_t>(m);
        if (lo < n) {
            const uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // standard normal, Box-Muller; fixed draw consumption (two per pair)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Derives a child seed from a parent seed and a tag. Chaining mix_seed
// gives every work item (participant, tree, fold, repetition, ...) its own
// independent stream keyed by identity, never by execution order.
constexpr uint64_t mix_seed(uint64_t h, uint64_t v) {
    uint64_t z = h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

template <typename... Tags>
constexpr uint64_t derive_seed(uint64_t base, Tags... tags) {
    uint64_t h = base;
    ((h = mix_seed(h, static_cast<uint64_t>(tags))), ...);
    return h;
}

// First-level stream tags. Modules key their sub-streams off these so two
// different purposes can never collide on the same derived seed.
namespace streams {
enum : uint64_t {
    script = 0x5C1,
    style = 0x57E,
    noise = 0x401,
    texture = 0x7EC,
    button = 0xB07,
    rssi = 0x255,
    meta = 0x3E7,
    tree = 0x76E,
    split = 0x519,
    dummy = 0xD00,
    bootstrap = 0xB00,
    ablation = 0xAB1,
    curve = 0xC0E,
};
}

}  // namespace washdet
