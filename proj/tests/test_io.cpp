#include "ml4c/errors.hpp"
#include "ml4c/io.hpp"
#include "support/helpers.hpp"

#include <doctest.h>

#include <fstream>

using namespace ml4c;
using testing::TempDir;

TEST_CASE("graphs round-trip through JSON") {
    TempDir dir("graph");
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        const Dag dag = testing::random_dag(rng, 2, 15);
        write_dag(dir / "g.json", dag);
        CHECK(read_dag(dir / "g.json") == dag);
        const Pdag c = cpdag_of(dag);
        write_pdag(dir / "c.json", c);
        CHECK(read_pdag(dir / "c.json") == c);
        CHECK(read_skeleton(dir / "c.json") == skeleton_of(dag));
        write_skeleton(dir / "s.json", skeleton_of(dag));
        CHECK(read_skeleton(dir / "s.json") == skeleton_of(dag));
    }
    CHECK_THROWS_AS(read_dag(dir / "c.json").size(), DataError);
}

TEST_CASE("graph files are validated") {
    CHECK_THROWS_AS(pdag_from_json(R"({"nodes": ["a", "b"], "directed_edges": [["a", "z"]]})"), InvalidNodes);
    CHECK_THROWS_AS(pdag_from_json(R"({"nodes": ["a", "a"]})"), InvalidNodes);
    CHECK_THROWS_AS(pdag_from_json(R"({"nodes": ["a"], "extra": 1})"), DataError);
    CHECK_THROWS_AS(pdag_from_json("not json"), DataError);
}

TEST_CASE("datasets round-trip with cardinalities") {
    TempDir dir("data");
    Rng rng(2);
    SynthConfig cfg;
    const BayesNet bn = gen_bayes_net(cfg, rng);
    const auto data = forward_sample(bn, 300, rng);
    write_dataset(dir / "d.csv", data);
    CHECK(read_dataset(dir / "d.csv") == data);
    std::filesystem::remove(dataset_meta_path(dir / "d.csv"));
    const auto inferred = read_dataset(dir / "d.csv");
    CHECK(inferred.n_rows() == data.n_rows());
    for (int c = 0; c < data.n_cols(); ++c)
        CHECK(inferred.cardinality(c) <= data.cardinality(c));
}

TEST_CASE("malformed datasets are data errors") {
    TempDir dir("bad");
    write_text_atomic(dir / "a.csv", "x,y\n0,1\n1\n");
    CHECK_THROWS_AS(read_dataset(dir / "a.csv"), DataError);
    write_text_atomic(dir / "b.csv", "x,y\n0,-1\n");
    CHECK_THROWS_AS(read_dataset(dir / "b.csv"), DataError);
    CHECK_THROWS_AS(read_dataset(dir / "missing.csv"), IoError);
}

TEST_CASE("failed writes leave nothing behind") {
    TempDir dir("atomic");
    CHECK_THROWS_AS(write_text_atomic(dir / "no_such_dir" / "f.txt", "x"), IoError);
    CHECK_FALSE(std::filesystem::exists(dir / "no_such_dir"));
    write_text_atomic(dir / "f.txt", "hello");
    CHECK(read_text(dir / "f.txt") == "hello");
    int entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path()))
        ++entries;
    CHECK(entries == 1);
}

TEST_CASE("corpora replay to identical manifests and reload") {
    TempDir dir("corpus");
    SynthConfig cfg;
    cfg.sample_size = 100;
    cfg.seed = 5;
    const auto items = build_corpus(cfg, 3);
    const auto m1 = write_corpus(dir / "a", cfg, items);
    const auto m2 = write_corpus(dir / "b", cfg, build_corpus(cfg, 3));
    CHECK(read_text(dir / "a" / "manifest.json") == read_text(dir / "b" / "manifest.json"));
    CHECK(manifest_to_json(manifest_from_json(manifest_to_json(m1))) == manifest_to_json(m1));
    const auto back = read_corpus(dir / "a");
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].net.dag == items[i].net.dag);
        CHECK(back[i].data == items[i].data);
        CHECK(back[i].seed == items[i].seed);
    }
    CHECK_THROWS_AS(write_corpus(dir / "a", cfg, items), IoError);
    const auto empty = write_corpus(dir / "empty", cfg, {});
    CHECK(empty.graphs.empty());
    CHECK(read_corpus(dir / "empty").empty());
}

TEST_CASE("model files keep every bit") {
    UtModel m;
    m.basis = EmbeddingBasis::from_seed(77);
    m.threshold = 0.123456789012345678;
    m.ensemble.n_features = 3;
    m.ensemble.base_margin = -0.1 / 3.0;
    m.ensemble.training_loss = {0.6931471805599453, 1e-300};
    RegressionTree t;
    t.nodes = {{1, 0.1 + 0.2, 1, 2, 0.0}, {-1, 0.0, -1, -1, 1.0 / 3.0}, {-1, 0.0, -1, -1, -2.0 / 7.0}};
    m.ensemble.trees = {t, t};
    const UtModel back = model_from_json(model_to_json(m));
    CHECK(back.basis.w == m.basis.w);
    CHECK(back.basis.b == m.basis.b);
    CHECK(back.threshold == m.threshold);
    CHECK(back.ensemble.base_margin == m.ensemble.base_margin);
    CHECK(back.ensemble.training_loss == m.ensemble.training_loss);
    CHECK(back.ensemble.trees[0] == t);
    CHECK_THROWS_AS(model_from_json(R"({"schema_version": "other"})"), SchemaMismatch);
}

TEST_CASE("content hash is stable FNV-1a") {
    CHECK(content_hash("") == "cbf29ce484222325");
    CHECK(content_hash("a") == "af63dc4c8601ec8c");
}
