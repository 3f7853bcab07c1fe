#pragma once

#include <cstdint>
#include <vector>

namespace pgg {

// A point in the unit cube [0,1]^dim produced by the sampler.
using UnitPoint = std::vector<double>;

constexpr int kSobolMaxDim = 21;

// Sobol low-discrepancy sequence (Joe-Kuo direction numbers, Gray-code order,
// index 0 = origin), with optional Owen-style nested digital scrambling keyed
// by `seed`. Unscrambled output matches the usual reference implementations
// bit for bit; scrambling preserves the digital-net structure, so every
// dyadic stratification property of the plain sequence also holds for
// scrambled output.
class SobolSequence {
public:
    // Throws Error(unsupported_dimension) when dim < 1 or dim > kSobolMaxDim.
    explicit SobolSequence(int dim, bool scramble = false, std::uint64_t seed = 0);

    UnitPoint next();
    void reset();

    int dim() const { return dim_; }

private:
    std::uint64_t scramble_value(int d, std::uint64_t v) const;

    int dim_;
    bool scramble_;
    std::uint64_t seed_;
    std::uint64_t index_ = 0;
    std::vector<std::vector<std::uint64_t>> directions_;  // [dim][bit]
    std::vector<std::uint64_t> state_;                    // unscrambled integer coordinates
};

// Generate the first n points of the sequence. Warns on stderr when n is not
// a power of two (the balance properties hold only for power-of-two blocks)
// but still produces the points. Deterministic given (dim, n, scramble, seed);
// unscrambled mode ignores seed.
std::vector<UnitPoint> sobol_generate(int dim, int n, bool scramble = false,
                                      std::uint64_t seed = 0);

}  // namespace pgg
