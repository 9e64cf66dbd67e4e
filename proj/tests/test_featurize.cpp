#include "ml4c/featurize.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <set>

using namespace ml4c;

TEST_CASE("overlap coefficient") {
    CHECK(overlap(NodeSet{}, NodeSet{1}) == 0.0);
    CHECK(overlap(NodeSet{1, 2}, NodeSet{2, 3, 4}) == doctest::Approx(0.5));
    CHECK(overlap(NodeSet{2}, NodeSet{1, 2, 3}) == 1.0);
    CHECK(overlap(NodeSet{1}, Ensemble{}) == 0.0);
    CHECK(overlap(NodeSet{1}, Ensemble{{1}, {2}, {}}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("elementwise union deduplicates") {
    CHECK(elementwise_union({{}, {3}, {1, 3}}, 3) == Ensemble{{1, 3}, {3}});
}

TEST_CASE("embedding statistics match brute-force sums") {
    const auto basis = EmbeddingBasis::from_seed(5);
    const std::vector<double> v{0.1, 0.7, 0.7, 0.95, 0.0};
    const auto e = embed_channel(v, basis);
    CHECK(e[0] == doctest::Approx(0.49));
    CHECK(e[2] == 0.95);
    CHECK(e[3] == 0.0);
    double var = 0.0;
    for (double x : v)
        var += (x - 0.49) * (x - 0.49);
    CHECK(e[1] == doctest::Approx(std::sqrt(var / 5)));
    for (int j = 0; j < kEmbeddingDim; ++j)
        CHECK(std::abs(e[static_cast<std::size_t>(4 + j)] -
                       oracle::embedding_mean(v, basis.w[static_cast<std::size_t>(j)], basis.b[static_cast<std::size_t>(j)])) < 1e-12);
    const auto empty = embed_channel({}, basis);
    CHECK(std::all_of(empty.begin(), empty.end(), [](double x) { return x == 0.0; }));
}

TEST_CASE("feature names are unique and match the dimension") {
    const auto& names = feature_names();
    CHECK(names.size() == kFeatureDim);
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == kFeatureDim);
    CHECK(14 + 19 * kBlockDim == kFeatureDim);
}

TEST_CASE("feature vector layout on an oracle collider with an extra child") {
    // 0 -> 2 <- 1, 2 -> 3
    const Dag dag(4, {{0, 2}, {1, 2}, {2, 3}});
    const OracleTester t(dag);
    const auto basis = EmbeddingBasis::from_seed(1);
    const auto fv = featurize_ut(skeleton_of(dag), UnshieldedTriple::make(0, 2, 1), t, basis);
    REQUIRE(fv.values.size() == kFeatureDim);
    CHECK(fv.schema == kFeatureSchema);
    CHECK(fv.values[0] == 0.0);  // |PC_X|
    CHECK(fv.values[2] == 1.0);  // |PC_T| = {3}
    CHECK(fv.values[3] == 1.0);  // S = {{}}
    CHECK(fv.values[11] == 0.0); // olp({T}, S)
    CHECK(fv.values[12] == 1.0); // X, Y dependent given T
    // first block: X~Y | {}; one test, independent
    CHECK(fv.values[14] == 1.0);
    CHECK(fv.values[15] == 0.0);
    // second block: X~Y | PC_T singletons, dependent given the collider's child
    CHECK(fv.values[14 + kBlockDim] == 1.0);
    CHECK(fv.values[14 + kBlockDim + 1] == 1.0);
}

TEST_CASE("features are deterministic and parallel equals serial") {
    Rng rng(4);
    SynthConfig cfg;
    cfg.sample_size = 2000;
    const BayesNet bn = gen_bayes_net(cfg, rng);
    const auto data = forward_sample(bn, 2000, rng);
    const G2Tester t1(data), t2(data);
    const Skeleton skel = skeleton_of(bn.dag);
    const auto uts = unshielded_triples(skel);
    const auto basis = EmbeddingBasis::from_seed(3);
    const auto a = featurize_all(skel, uts, t1, basis);
    const auto b = featurize_all_serial(skel, uts, t2, basis);
    REQUIRE(a.size() == uts.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].values == b[i].values);
        CHECK(a[i].values.size() == kFeatureDim);
    }
    if (!uts.empty()) {
        const auto other = featurize_ut(skel, uts[0], t1, EmbeddingBasis::from_seed(4));
        CHECK(other.values != a[0].values);
    }
}
