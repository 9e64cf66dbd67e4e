#include "ml4c/bif.hpp"
#include "ml4c/errors.hpp"

#include <doctest.h>

#include <filesystem>

using namespace ml4c;

namespace {

const std::filesystem::path kNetworks = std::filesystem::path(ML4C_DATA_DIR) / "networks";

const char* kTwoNodes = R"(network tiny {
}
variable rain {
  type discrete [ 2 ] { yes, no };
}
variable wet {
  type discrete [ 3 ] { dry, damp, soaked };
}
probability ( rain ) {
  table 0.2, 0.8;
}
probability ( wet | rain ) {
  (yes) 0.1, 0.3, 0.6;
  (no) 0.7, 0.2, 0.1;
}
)";

} // namespace

TEST_CASE("a two-node network") {
    const BayesNet bn = parse_bif_text(kTwoNodes);
    CHECK(bn.dag.names() == std::vector<std::string>{"rain", "wet"});
    CHECK(bn.dag.edges() == std::vector<Edge>{{0, 1}});
    CHECK(bn.cardinalities == std::vector<int>{2, 3});
    const double expected[] = {0.1, 0.3, 0.6, 0.7, 0.2, 0.1};
    REQUIRE(bn.cpts[1].table.size() == 6);
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(bn.cpts[1].table[i] == doctest::Approx(expected[i]).epsilon(1e-15));
    CHECK(bn.state_names[1] == std::vector<std::string>{"dry", "damp", "soaked"});
}

TEST_CASE("a parented table lists the child state slowest") {
    const char* text = R"(
variable a { type discrete [ 2 ] { a0, a1 }; }
variable b { type discrete [ 2 ] { b0, b1 }; }
variable c { type discrete [ 2 ] { c0, c1 }; }
probability ( a ) { table 0.5, 0.5; }
probability ( b ) { table 0.5, 0.5; }
probability ( c | b, a ) { table 0.1, 0.2, 0.3, 0.4, 0.9, 0.8, 0.7, 0.6; }
)";
    const BayesNet bn = parse_bif_text(text);
    const Cpt& c = bn.cpts[2];
    CHECK(c.parents == NodeSet{0, 1});
    // BIF column order is (b, a) with a fastest: (b0,a0) (b0,a1) (b1,a0) (b1,a1).
    // P(c0 | a1, b0) = 0.2
    const int a1b0[] = {1, 0};
    CHECK(c.row(c.row_index(a1b0))[0] == doctest::Approx(0.2));
    const int a0b1[] = {0, 1};
    CHECK(c.row(c.row_index(a0b1))[1] == doctest::Approx(0.7));
}

TEST_CASE("rows off by more than the tolerance are parse errors with a position") {
    std::string text = kTwoNodes;
    text.replace(text.find("(no) 0.7"), 8, "(no) 0.6");
    try {
        parse_bif_text(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 14);
        CHECK(e.column() == 3);
    }
}

TEST_CASE("rows within the tolerance are renormalized") {
    std::string text = kTwoNodes;
    text.replace(text.find("0.2, 0.8"), 8, "0.2, 0.8000004");
    const BayesNet bn = parse_bif_text(text);
    CHECK(bn.cpts[0].table[0] + bn.cpts[0].table[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("syntax and feature errors") {
    CHECK_THROWS_AS(parse_bif_text("variable x { type continuous; }"), UnsupportedFeature);
    CHECK_THROWS_AS(parse_bif_text("variable x { type discrete [ 2 ] { a, b }; }"), ParseError);
    CHECK_THROWS_AS(parse_bif_text("variable x { type discrete [ 3 ] { a, b }; }"), ParseError);
    CHECK_THROWS_AS(parse_bif_text("probability ( y ) { table 1; }"), ParseError);
    CHECK_THROWS_AS(parse_bif_text("variable x { type discrete [ 2 ] { a, b }; } probability ( x ) { default 0.5, 0.5; }"),
                    UnsupportedFeature);
    CHECK_THROWS_AS(parse_bif_text("variable x { type discrete [ 2 ] { a, b };"), ParseError);
    std::string missing = kTwoNodes;
    missing.erase(missing.find("  (no)"), 21);
    CHECK_THROWS_AS(parse_bif_text(missing), ParseError);
}

TEST_CASE("the child network has 20 nodes and 25 edges") {
    const BayesNet bn = parse_bif(kNetworks / "child.bif");
    CHECK(bn.dag.size() == 20);
    CHECK(bn.dag.edges().size() == 25);
}

TEST_CASE("every bundled network parses and validates") {
    const std::pair<const char*, std::pair<int, int>> expected[] = {
        {"asia.bif", {8, 8}},   {"cancer.bif", {5, 4}}, {"earthquake.bif", {5, 4}}, {"survey.bif", {6, 6}},
        {"sachs.bif", {11, 17}}, {"child.bif", {20, 25}}, {"alarm.bif", {37, 46}},
    };
    for (const auto& [file, shape] : expected) {
        CAPTURE(file);
        const BayesNet bn = parse_bif(kNetworks / file);
        CHECK(bn.dag.size() == shape.first);
        CHECK(static_cast<int>(bn.dag.edges().size()) == shape.second);
        CHECK_NOTHROW(bn.validate());
    }
    CHECK_THROWS_AS(parse_bif(kNetworks / "missing.bif"), IoError);
}
