#include "ml4c/rng.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ml4c {

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo)
        throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0)  // full 64-bit range
        return static_cast<std::int64_t>(engine_());
    // Reject the incomplete final bucket.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % span);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
}

double Rng::normal(double mean, double stddev) {
    double u, v, s;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return mean + stddev * u * std::sqrt(-2.0 * std::log(s) / s);
}

double Rng::gamma(double shape) {
    if (!(shape > 0.0))
        throw std::invalid_argument("gamma: shape must be positive");
    if (shape < 1.0) {
        double u;
        do {
            u = uniform01();
        } while (u == 0.0);
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x)
            return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
            return d * v;
    }
}

std::vector<double> Rng::dirichlet(double alpha, int dim) {
    std::vector<double> out(static_cast<std::size_t>(dim));
    for (;;) {
        double total = 0.0;
        for (auto& x : out) {
            x = gamma(alpha);
            total += x;
        }
        if (total > 0.0 && std::isfinite(total)) {
            for (auto& x : out)
                x /= total;
            return out;
        }
    }
}

std::vector<int> Rng::permutation(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        const auto j = static_cast<int>(uniform_int(0, i));
        std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    return p;
}

} // namespace ml4c
