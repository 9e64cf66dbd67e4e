#include "ml4c/errors.hpp"
#include "ml4c/gbdt.hpp"
#include "ml4c/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace ml4c;

namespace {

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
    // Mann-Whitney with average ranks for ties.
    std::vector<double> rank(scores.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]])
            ++j;
        for (std::size_t k = i; k < j; ++k)
            rank[idx[k]] = 0.5 * static_cast<double>(i + j + 1);
        i = j;
    }
    double pos = 0, sum = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == 1) {
            ++pos;
            sum += rank[i];
        }
    const double neg = static_cast<double>(labels.size()) - pos;
    return (sum - pos * (pos + 1) / 2) / (pos * neg);
}

} // namespace

TEST_CASE("separable single-feature data is fit within 50 rounds") {
    FeatureMatrix x(200, 1);
    std::vector<int> y;
    for (int i = 0; i < 200; ++i) {
        x.at(i, 0) = i;
        y.push_back(i >= 100 ? 1 : 0);
    }
    BoostParams p;
    p.n_rounds = 50;
    const auto m = train_gbdt(x, y, p);
    REQUIRE(m.training_loss.size() == 50);
    CHECK(m.training_loss.back() < 0.01);
    CHECK(std::is_sorted(m.training_loss.rbegin(), m.training_loss.rend()));
    CHECK(m.predict_proba(std::vector<double>{150.0}) > 0.9);
    CHECK(m.predict_proba(std::vector<double>{10.0}) < 0.1);
}

TEST_CASE("labels independent of features give chance-level held-out AUC") {
    Rng rng(17);
    const int n = 4000, d = 5;
    FeatureMatrix xtr(n, d), xte(n, d);
    std::vector<int> ytr, yte;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) {
            xtr.at(i, j) = rng.uniform01();
            xte.at(i, j) = rng.uniform01();
        }
        ytr.push_back(rng.uniform01() < 0.4 ? 1 : 0);
        yte.push_back(rng.uniform01() < 0.4 ? 1 : 0);
    }
    const auto m = train_gbdt(xtr, ytr, BoostParams{});
    std::vector<double> s;
    for (int i = 0; i < n; ++i)
        s.push_back(m.predict_proba(xte.row(i)));
    const double a = auc(s, yte);
    CHECK(a >= 0.45);
    CHECK(a <= 0.55);
}

TEST_CASE("parallel split search builds the same trees as the serial reference") {
    Rng rng(18);
    const int n = 600, d = 12;
    FeatureMatrix x(n, d);
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j)
            x.at(i, j) = j % 3 == 0 ? static_cast<double>(rng.uniform_int(0, 3)) : rng.normal();
        y.push_back(x.at(i, 1) + 0.5 * x.at(i, 3) + rng.normal() > 0 ? 1 : 0);
    }
    BoostParams p;
    p.n_rounds = 20;
    const auto a = train_gbdt(x, y, p, SplitSearch::Parallel);
    const auto b = train_gbdt(x, y, p, SplitSearch::SerialReference);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t)
        CHECK(a.trees[t] == b.trees[t]);
    CHECK(a.training_loss == b.training_loss);
}

TEST_CASE("degenerate inputs") {
    FeatureMatrix x(3, 1);
    const int same[] = {1, 1, 1};
    CHECK_THROWS_AS(train_gbdt(x, same, BoostParams{}), DegenerateLabels);
    const int short_labels[] = {0, 1};
    CHECK_THROWS_AS(train_gbdt(x, short_labels, BoostParams{}), LengthMismatch);
    TreeEnsembleModel empty;
    CHECK(empty.predict_proba(std::vector<double>{1.0}) == 0.5);
}
