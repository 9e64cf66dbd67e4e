#pragma once

// Gradient-boosted regression trees with logistic loss and exact greedy
// splits. Defaults mirror the usual library defaults: 100 rounds, depth 6,
// learning rate 0.3, L2 leaf penalty 1, min child hessian 1, base score 0.5.

#include <cstdint>
#include <span>
#include <vector>

namespace ml4c {

/// Dense row-major feature matrix.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {}

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    double at(int r, int c) const { return data_[index(r, c)]; }
    double& at(int r, int c) { return data_[index(r, c)]; }
    std::span<const double> row(int r) const {
        return std::span<const double>(data_).subspan(index(r, 0), static_cast<std::size_t>(cols_));
    }
    void set_row(int r, std::span<const double> values);

private:
    std::size_t index(int r, int c) const {
        return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c);
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

struct TreeNode {
    /// -1 for leaves.
    int feature = -1;
    /// Rows with value < threshold go left.
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    /// Leaf output, learning rate already applied.
    double value = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
    /// nodes[0] is the root.
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const;
    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

struct BoostParams {
    int n_rounds = 100;
    int max_depth = 6;
    double learning_rate = 0.3;
    double lambda = 1.0;
    double gamma = 0.0;
    double min_child_weight = 1.0;
    double base_score = 0.5;
    /// Recorded for provenance; exact greedy training is deterministic.
    std::uint64_t seed = 0;
};

struct TreeEnsembleModel {
    std::vector<RegressionTree> trees;
    double learning_rate = 0.3;
    int n_rounds = 0;
    int n_features = 0;
    /// logit(base_score)
    double base_margin = 0.0;
    /// Mean logistic loss after each round.
    std::vector<double> training_loss;

    double margin(std::span<const double> x) const;
    /// sigmoid(margin)
    double predict_proba(std::span<const double> x) const;
};

enum class SplitSearch { Parallel, SerialReference };

/// Throws DegenerateLabels if one class is absent, LengthMismatch on shape
/// disagreement.
TreeEnsembleModel train_gbdt(const FeatureMatrix& x, std::span<const int> labels, const BoostParams& params,
                             SplitSearch search = SplitSearch::Parallel);

double sigmoid(double m);

} // namespace ml4c
