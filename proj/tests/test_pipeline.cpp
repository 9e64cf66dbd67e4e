#include "ml4c/errors.hpp"
#include "ml4c/pipeline.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <set>

using namespace ml4c;

namespace {

std::vector<VCandidate> random_candidates(Rng& rng, int nodes, int count) {
    std::vector<VCandidate> out;
    std::set<UnshieldedTriple> seen;
    while (static_cast<int>(out.size()) < count) {
        const auto x = static_cast<NodeId>(rng.uniform_int(0, nodes - 1));
        const auto t = static_cast<NodeId>(rng.uniform_int(0, nodes - 1));
        const auto y = static_cast<NodeId>(rng.uniform_int(0, nodes - 1));
        if (x == t || t == y || x == y)
            continue;
        const auto ut = UnshieldedTriple::make(x, t, y);
        if (!seen.insert(ut).second)
            continue;
        // Coarse scores so ties occur.
        out.push_back({ut, static_cast<double>(rng.uniform_int(1, 10)) / 10.0});
    }
    return out;
}

} // namespace

TEST_CASE("disjoint candidates pass through") {
    const std::vector<VCandidate> c{{{0, 1, 2}, 0.5}, {{3, 4, 5}, 0.9}};
    const auto out = conflict_resolve(c);
    CHECK(out == std::vector<VCandidate>{{{3, 4, 5}, 0.9}, {{0, 1, 2}, 0.5}});
}

TEST_CASE("a conflicting pair keeps the higher score") {
    // A -> B <- C with 0.9 against B -> C <- D with 0.4
    const VCandidate abc{UnshieldedTriple::make(0, 1, 2), 0.9};
    const VCandidate bcd{UnshieldedTriple::make(1, 2, 3), 0.4};
    CHECK(conflicts(abc, bcd));
    CHECK(conflict_resolve({bcd, abc}) == std::vector<VCandidate>{abc});
}

TEST_CASE("a chain of conflicts resolves by dropping the lowest loser first") {
    // 0.9 <-> 0.8 <-> 0.7, with 0.9 and 0.7 compatible
    const VCandidate a{UnshieldedTriple::make(0, 1, 2), 0.9};
    const VCandidate b{UnshieldedTriple::make(1, 2, 3), 0.8};
    const VCandidate c{UnshieldedTriple::make(2, 3, 4), 0.7};
    REQUIRE(conflicts(a, b));
    REQUIRE(conflicts(b, c));
    REQUIRE_FALSE(conflicts(a, c));
    CHECK(conflict_resolve({c, b, a}) == std::vector<VCandidate>{a});
    // The heavier subset {a, c} exists; the greedy rule is the contract.
    CHECK(oracle::max_weight_conflict_free(std::vector<VCandidate>{a, b, c}) == doctest::Approx(1.6));
}

TEST_CASE("same-direction overlaps are compatible") {
    const VCandidate a{UnshieldedTriple::make(0, 2, 1), 0.9};
    const VCandidate b{UnshieldedTriple::make(0, 2, 3), 0.5};
    CHECK_FALSE(conflicts(a, b));
}

TEST_CASE("ties break by triple order") {
    const VCandidate a{UnshieldedTriple::make(0, 1, 2), 0.5};
    const VCandidate b{UnshieldedTriple::make(1, 2, 3), 0.5};
    CHECK(conflict_resolve({b, a}) == std::vector<VCandidate>{a});
}

TEST_CASE("fuzzed candidate sets resolve conflict-free without needless removals") {
    Rng rng(41);
    int divergences = 0;
    for (int rep = 0; rep < 500; ++rep) {
        const auto cands = random_candidates(rng, static_cast<int>(rng.uniform_int(4, 9)), static_cast<int>(rng.uniform_int(0, 12)));
        const auto out = conflict_resolve(cands);
        REQUIRE(oracle::conflict_free(out));
        for (const auto& c : cands) {
            const bool conflicts_any = std::any_of(cands.begin(), cands.end(), [&](const VCandidate& o) { return conflicts(c, o); });
            const bool kept = std::find(out.begin(), out.end(), c) != out.end();
            if (!conflicts_any)
                CHECK(kept);
        }
        double w = 0;
        for (const auto& c : out)
            w += c.score;
        const double best = oracle::max_weight_conflict_free(cands);
        CHECK(w <= best + 1e-12);
        divergences += w < best - 1e-12 ? 1 : 0;
    }
    MESSAGE("greedy below brute-force optimum on " << divergences << " of 500 fuzzed sets");
}

TEST_CASE("orient marks survivors and leaves the rest undirected") {
    const Skeleton skel(4, {{0, 1}, {1, 2}, {2, 3}});
    CHECK(orient(skel, {}) == Pdag::from_skeleton(skel));
    const VCandidate c{UnshieldedTriple{0, 1, 2}, 1.0};
    const Pdag p = orient(skel, std::vector<VCandidate>{c});
    CHECK(p.directed_edges() == std::vector<Edge>{{0, 1}, {2, 1}});
    CHECK(p.undirected_edges() == std::vector<Edge>{{2, 3}});
    const VCandidate d{UnshieldedTriple{1, 2, 3}, 1.0};
    CHECK_THROWS_AS(orient(skel, std::vector<VCandidate>{c, d}), OrientationConflict);
}

TEST_CASE("orient directs one edge per distinct (parent, child) pair") {
    Rng rng(42);
    for (int rep = 0; rep < 100; ++rep) {
        const Dag dag = testing::random_dag(rng, 5, 15);
        const Skeleton skel = skeleton_of(dag);
        std::vector<VCandidate> survivors;
        for (const auto& v : v_structures_of(dag))
            if (rng.uniform01() < 0.6)
                survivors.push_back({v, 1.0});
        std::set<Edge> pairs;
        for (const auto& s : survivors) {
            pairs.insert({s.triple.x, s.triple.t});
            pairs.insert({s.triple.y, s.triple.t});
        }
        const Pdag p = orient(skel, survivors);
        CHECK(p.directed_edges().size() == pairs.size());
        CHECK(p.skeleton() == skel);
    }
}

TEST_CASE("oracle tester with the CPC predicate recovers the CPDAG") {
    Rng rng(43);
    const Classifier cpc(PredicateKind::StrongCpc);
    PipelineConfig cfg;
    cfg.sepsets.max_size = -1;
    for (int rep = 0; rep < 40; ++rep) {
        const Dag dag = testing::random_dag(rng, 5, 15);
        const OracleTester t(dag);
        const Skeleton skel = skeleton_of(dag);
        const Pdag out = run_ml4c(t, skel, cpc, cfg);
        CHECK(out == cpdag_of(dag));
        CHECK(out.skeleton() == skel);
        cfg.parallel = !cfg.parallel;
    }
}

TEST_CASE("a skeleton without triples stays undirected") {
    const Dag dag(2, {{0, 1}});
    const OracleTester t(dag);
    const Skeleton skel = skeleton_of(dag);
    CHECK(run_ml4c(t, skel, Classifier(PredicateKind::StrongCpc)) == Pdag::from_skeleton(skel));
    CHECK_THROWS_AS(run_ml4c(t, Skeleton(3, {}), Classifier(PredicateKind::StrongCpc)), NodeMismatch);
}

TEST_CASE("survivors the Meek rules cannot reconcile are admitted greedily") {
    // 0 -> 1 <- 2 and 4 -> 3 <- 5 joined by 1 - 3: either orientation of
    // 1 - 3 creates a collider neither candidate asserts.
    const Skeleton skel(6, {{0, 1}, {1, 2}, {1, 3}, {3, 4}, {3, 5}});
    const VCandidate a{UnshieldedTriple{0, 1, 2}, 0.9};
    const VCandidate c{UnshieldedTriple{4, 3, 5}, 0.8};
    REQUIRE_FALSE(conflicts(a, c));
    CHECK_THROWS_AS(meek_closure(orient(skel, std::vector<VCandidate>{a, c})), OrientationConflict);
    const auto r = admit(skel, std::vector<VCandidate>{a, c});
    CHECK(r.admitted == std::vector<VCandidate>{a});
    CHECK(r.cpdag == meek_closure(orient(skel, std::vector<VCandidate>{a})));
    CHECK(r.cpdag.has_directed(1, 3));
}

TEST_CASE("every triple a candidate still yields a consistent orientation") {
    struct AlwaysDependent final : CiTester {
        int n_nodes() const override { return 5; }
        Dependence measure(NodeId, NodeId, std::span<const NodeId>) const override { return {1.0, 1.0}; }
    } t;
    const Skeleton skel(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    const auto r = run_ml4c_detailed(t, skel, Classifier(PredicateKind::Weak1));
    CHECK(r.candidates.size() == 3);
    CHECK(r.survivors == std::vector<VCandidate>{{UnshieldedTriple{0, 1, 2}, 1.0}});
    CHECK(r.admitted == r.survivors);
    CHECK(r.cpdag.skeleton() == skel);
}

TEST_CASE("training set construction") {
    CHECK(build_training_set({}, EmbeddingBasis::from_seed(0)).empty());
    Rng rng(44);
    BayesNet bn;
    bn.dag = Dag(3, {{0, 1}, {2, 1}});
    bn.cardinalities = {2, 2, 2};
    bn.cpts = gen_cpts(bn.dag, bn.cardinalities, rng);
    CorpusItem item{bn, forward_sample(bn, 1000, rng), 0, GraphModel::ER};
    const auto ex = build_training_set(std::vector<CorpusItem>{item}, EmbeddingBasis::from_seed(0), {}, 0.05, "toy");
    REQUIRE(ex.size() == 1);
    CHECK(ex[0].label == 1);
    CHECK(ex[0].provenance.corpus == "toy");
    CHECK(ex[0].provenance.triple == UnshieldedTriple{0, 1, 2});
}
