#pragma once

// Portable random stream.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Distributions are implemented here rather than taken from
// <random> because the standard library distributions differ across
// implementations; every draw below is a documented function of the engine
// output, so corpora replay bit-identically on any conforming toolchain.
//
//   uniform01      (u64 >> 11) * 2^-53, in [0, 1)
//   uniform_int    rejection sampling on the top bits, in [lo, hi]
//   normal         Marsaglia polar method, second variate discarded
//   gamma(a)       Marsaglia-Tsang; a < 1 boosted via gamma(a+1) * U^(1/a)
//   dirichlet      normalized independent gammas
//
// Seeds for sub-streams come from splitmix64 so each corpus item can be
// regenerated from (root seed, item index) alone.

#include <cstdint>
#include <random>
#include <vector>

namespace ml4c {

/// One step of the splitmix64 mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of sub-stream `index` under `root`.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(root) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Inclusive on both ends.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    double normal(double mean = 0.0, double stddev = 1.0);

    double gamma(double shape);

    /// Symmetric Dirichlet of the given dimension.
    std::vector<double> dirichlet(double alpha, int dim);

    /// Fisher-Yates permutation of 0..n-1.
    std::vector<int> permutation(int n);

private:
    std::mt19937_64 engine_;
};

} // namespace ml4c
