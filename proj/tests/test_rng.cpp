#include "ml4c/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace ml4c;

TEST_CASE("streams replay from the seed") {
    Rng a(42), b(42), c(43);
    std::vector<std::uint64_t> va, vb, vc;
    for (int i = 0; i < 100; ++i) {
        va.push_back(a.next_u64());
        vb.push_back(b.next_u64());
        vc.push_back(c.next_u64());
    }
    CHECK(va == vb);
    CHECK(va != vc);
}

TEST_CASE("derived seeds are distinct across indices and roots") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t root = 0; root < 20; ++root)
        for (std::uint64_t i = 0; i < 200; ++i)
            seen.insert(derive_seed(root, i));
    CHECK(seen.size() == 4000);
    static_assert(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("uniform draws stay in range and hit every integer") {
    Rng rng(1);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const double u = rng.uniform01();
        CHECK((u >= 0.0 && u < 1.0));
        const auto k = rng.uniform_int(3, 9);
        REQUIRE((k >= 3 && k <= 9));
        ++hits[static_cast<std::size_t>(k - 3)];
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h > 800; }));
    CHECK(rng.uniform_int(5, 5) == 5);
}

TEST_CASE("normal and gamma moments") {
    Rng rng(2);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal(1.0, 2.0);
        s += x;
        s2 += x * x;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    CHECK(std::abs(mean - 1.0) < 5 * 2.0 / std::sqrt(n));
    CHECK(std::abs(var - 4.0) < 0.1);
    for (double shape : {0.3, 1.0, 2.5}) {
        double g = 0.0;
        for (int i = 0; i < n; ++i)
            g += rng.gamma(shape);
        CHECK(std::abs(g / n - shape) < 5 * std::sqrt(shape / n));
    }
}

TEST_CASE("dirichlet rows are distributions and permutations are bijections") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const auto p = rng.dirichlet(0.1, 4);
        CHECK(p.size() == 4);
        CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::all_of(p.begin(), p.end(), [](double v) { return v >= 0.0; }));
        auto perm = rng.permutation(10);
        std::sort(perm.begin(), perm.end());
        std::vector<int> id(10);
        std::iota(id.begin(), id.end(), 0);
        CHECK(perm == id);
    }
}
