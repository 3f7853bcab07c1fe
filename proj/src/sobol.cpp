#include "pgg/sobol.hpp"

#include <bit>
#include <iostream>

#include "pgg/errors.hpp"
#include "pgg/rng.hpp"

namespace pgg {
namespace {

constexpr int kBits = 52;  // fits a double mantissa, so coordinates are exact dyadics

struct JoeKuoRow {
    int s;                 // polynomial degree
    std::uint32_t a;       // polynomial coefficients (excluding leading/trailing 1)
    std::uint32_t m[7];    // initial direction integers m_1..m_s
};

// Joe-Kuo "new-joe-kuo-6" table rows for dimensions 2..21 (dimension 1 is the
// van der Corput sequence). Cross-checked against SciPy's Sobol output.
constexpr JoeKuoRow kJoeKuo[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
};

std::vector<std::uint64_t> direction_numbers(int d) {
    std::vector<std::uint64_t> v(kBits);
    if (d == 0) {
        for (int j = 0; j < kBits; ++j) v[j] = 1ULL << (kBits - 1 - j);
        return v;
    }
    const JoeKuoRow& row = kJoeKuo[d - 1];
    const int s = row.s;
    for (int j = 0; j < s; ++j) v[j] = static_cast<std::uint64_t>(row.m[j]) << (kBits - 1 - j);
    for (int j = s; j < kBits; ++j) {
        std::uint64_t x = v[j - s] ^ (v[j - s] >> s);
        for (int k = 1; k < s; ++k) {
            if ((row.a >> (s - 1 - k)) & 1U) x ^= v[j - k];
        }
        v[j] = x;
    }
    return v;
}

}  // namespace

SobolSequence::SobolSequence(int dim, bool scramble, std::uint64_t seed)
    : dim_(dim), scramble_(scramble), seed_(seed) {
    if (dim < 1 || dim > kSobolMaxDim) {
        throw Error(ErrorCode::unsupported_dimension,
                    "sobol dimension " + std::to_string(dim) + " outside [1, " +
                        std::to_string(kSobolMaxDim) + "]");
    }
    directions_.reserve(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) directions_.push_back(direction_numbers(d));
    state_.assign(static_cast<std::size_t>(dim), 0);
}

void SobolSequence::reset() {
    index_ = 0;
    state_.assign(static_cast<std::size_t>(dim_), 0);
}

// Owen nested scrambling: walking the binary expansion from the most
// significant digit, each digit is flipped by a pseudorandom bit keyed on the
// tree node reached by the *original* digit prefix. Scrambled digits of a
// point therefore depend only on (seed, dimension, its own value), which
// keeps the sequence-prefix property across different n.
std::uint64_t SobolSequence::scramble_value(int d, std::uint64_t v) const {
    std::uint64_t key = splitmix64(seed_ ^ (0x51ed270b7a2cf285ULL * static_cast<std::uint64_t>(d + 1)));
    std::uint64_t node = 1;  // heap-style node id: (1 << depth) | prefix
    std::uint64_t out = 0;
    for (int j = kBits - 1; j >= 0; --j) {
        std::uint64_t bit = (v >> j) & 1ULL;
        std::uint64_t flip = splitmix64(key ^ node) & 1ULL;
        out |= (bit ^ flip) << j;
        node = (node << 1) | bit;
    }
    return out;
}

UnitPoint SobolSequence::next() {
    constexpr double norm = 1.0 / static_cast<double>(1ULL << kBits);
    if (index_ > 0) {
        // Gray-code step: flip the direction number of the lowest zero bit of index-1.
        int j = std::countr_one(index_ - 1);
        for (int d = 0; d < dim_; ++d) state_[static_cast<std::size_t>(d)] ^= directions_[static_cast<std::size_t>(d)][j];
    }
    ++index_;
    UnitPoint p(static_cast<std::size_t>(dim_));
    for (int d = 0; d < dim_; ++d) {
        std::uint64_t v = state_[static_cast<std::size_t>(d)];
        if (scramble_) v = scramble_value(d, v);
        p[static_cast<std::size_t>(d)] = static_cast<double>(v) * norm;
    }
    return p;
}

std::vector<UnitPoint> sobol_generate(int dim, int n, bool scramble, std::uint64_t seed) {
    if (n < 0) throw Error(ErrorCode::usage, "sobol_generate: n must be >= 0");
    if (n > 0 && (n & (n - 1)) != 0) {
        std::cerr << "[pgg] warning: sobol n=" << n
                  << " is not a power of two; balance properties hold only for 2^m blocks\n";
    }
    SobolSequence seq(dim, scramble, seed);
    std::vector<UnitPoint> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(seq.next());
    return out;
}

}  // namespace pgg
