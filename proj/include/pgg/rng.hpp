#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace pgg {

// splitmix64 step: the stable 64-bit mixer used everywhere seeds are derived.
// Fully specified so streams are identical across platforms and compilers.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a over bytes; used for file digests and for hashing string ids into
// seed-derivation units.
std::uint64_t fnv1a64(std::string_view bytes);

// Stage/unit seed derivation: seed = splitmix64(splitmix64(master ^ fnv1a64(label)) ^ unit).
// Streams for distinct (label, unit) pairs are independent of batch ordering.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t unit = 0);

// Small deterministic generator built on splitmix64. The standard <random>
// distributions are implementation-defined, so all draws go through these
// fully specified helpers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0,1) with 53 bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [lo, hi] via rejection (unbiased).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    // Standard normal via Box-Muller (no state caching, two u64 draws per call).
    double normal();

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace pgg
