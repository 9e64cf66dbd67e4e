#include "ml4c/gbdt.hpp"

#include "ml4c/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <optional>

namespace ml4c {

void FeatureMatrix::set_row(int r, std::span<const double> values) {
    if (static_cast<int>(values.size()) != cols_)
        throw LengthMismatch("feature row has " + std::to_string(values.size()) + " values, expected " + std::to_string(cols_));
    std::copy(values.begin(), values.end(), data_.begin() + static_cast<std::ptrdiff_t>(index(r, 0)));
}

double RegressionTree::predict(std::span<const double> x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }

double TreeEnsembleModel::margin(std::span<const double> x) const {
    double m = base_margin;
    for (const auto& t : trees)
        m += t.predict(x);
    return m;
}

double TreeEnsembleModel::predict_proba(std::span<const double> x) const { return sigmoid(margin(x)); }

namespace {

constexpr double kMinGain = 1e-6;

struct Split {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

struct Objective {
    double lambda;
    double gamma;
    double min_child_weight;

    double score(double g, double h) const { return g * g / (h + lambda); }

    /// Offer the split (gl, hl | g - gl, h - hl) at `threshold`; keeps the
    /// first best.
    void offer(Split& best, int feature, double threshold, double g, double h, double gl, double hl) const {
        const double gr = g - gl;
        const double hr = h - hl;
        if (hl < min_child_weight || hr < min_child_weight)
            return;
        const double gain = 0.5 * (score(gl, hl) + score(gr, hr) - score(g, h)) - gamma;
        if (gain > best.gain) {
            best.gain = gain;
            best.feature = feature;
            best.threshold = threshold;
        }
    }
};

struct NodeSums {
    double g = 0.0;
    double h = 0.0;
};

double leaf_value(const NodeSums& s, const BoostParams& p) { return -s.g / (s.h + p.lambda) * p.learning_rate; }

/// Level-wise exact greedy: every feature is scanned once per level over a
/// presorted row order, all open nodes at once. Features run in parallel.
class LevelWiseBuilder {
public:
    LevelWiseBuilder(const FeatureMatrix& x, const BoostParams& params) : x_(x), params_(params) {
        const int f = x.cols();
        sorted_.resize(static_cast<std::size_t>(f));
#pragma omp parallel for schedule(dynamic, 8)
        for (int c = 0; c < f; ++c) {
            auto& order = sorted_[static_cast<std::size_t>(c)];
            order.resize(static_cast<std::size_t>(x.rows()));
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return x.at(a, c) < x.at(b, c); });
        }
    }

    RegressionTree build(std::span<const double> grad, std::span<const double> hess) const {
        const Objective obj{params_.lambda, params_.gamma, params_.min_child_weight};
        const int n = x_.rows();
        const int f = x_.cols();
        RegressionTree tree;
        tree.nodes.emplace_back();
        std::vector<int> position(static_cast<std::size_t>(n), 0);
        std::vector<int> frontier{0};

        for (int depth = 0; !frontier.empty(); ++depth) {
            const auto sums = node_sums(tree, position, grad, hess);
            if (depth == params_.max_depth) {
                for (int id : frontier)
                    tree.nodes[static_cast<std::size_t>(id)].value = leaf_value(sums[static_cast<std::size_t>(id)], params_);
                break;
            }
            std::vector<int> slot(tree.nodes.size(), -1);
            for (std::size_t k = 0; k < frontier.size(); ++k)
                slot[static_cast<std::size_t>(frontier[k])] = static_cast<int>(k);
            const std::size_t open = frontier.size();

            std::vector<Split> per_feature(static_cast<std::size_t>(f) * open);
#pragma omp parallel for schedule(dynamic, 4)
            for (int c = 0; c < f; ++c) {
                std::vector<double> gl(open, 0.0), hl(open, 0.0), last(open, 0.0);
                std::vector<std::uint8_t> started(open, 0);
                Split* best = per_feature.data() + static_cast<std::size_t>(c) * open;
                for (int r : sorted_[static_cast<std::size_t>(c)]) {
                    const int k = slot[static_cast<std::size_t>(position[static_cast<std::size_t>(r)])];
                    if (k < 0)
                        continue;
                    const auto uk = static_cast<std::size_t>(k);
                    const double v = x_.at(r, c);
                    if (started[uk] && v != last[uk]) {
                        const auto& s = sums[static_cast<std::size_t>(frontier[uk])];
                        obj.offer(best[uk], c, 0.5 * (last[uk] + v), s.g, s.h, gl[uk], hl[uk]);
                    }
                    gl[uk] += grad[static_cast<std::size_t>(r)];
                    hl[uk] += hess[static_cast<std::size_t>(r)];
                    last[uk] = v;
                    started[uk] = 1;
                }
            }

            std::vector<int> next;
            std::vector<Split> chosen(open);
            for (std::size_t k = 0; k < open; ++k) {
                Split best;
                for (int c = 0; c < f; ++c) {
                    const Split& s = per_feature[static_cast<std::size_t>(c) * open + k];
                    if (s.feature >= 0 && s.gain > best.gain)
                        best = s;
                }
                chosen[k] = best;
                const int id = frontier[k];
                if (best.feature < 0 || best.gain <= kMinGain) {
                    tree.nodes[static_cast<std::size_t>(id)].value = leaf_value(sums[static_cast<std::size_t>(id)], params_);
                    chosen[k].feature = -1;
                    continue;
                }
                const int left = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                auto& node = tree.nodes[static_cast<std::size_t>(id)];
                node.feature = best.feature;
                node.threshold = best.threshold;
                node.left = left;
                node.right = left + 1;
                next.push_back(left);
                next.push_back(left + 1);
            }
            for (int r = 0; r < n; ++r) {
                const int id = position[static_cast<std::size_t>(r)];
                if (id >= static_cast<int>(slot.size()) || slot[static_cast<std::size_t>(id)] < 0)
                    continue;
                const auto& node = tree.nodes[static_cast<std::size_t>(id)];
                if (node.is_leaf())
                    continue;
                position[static_cast<std::size_t>(r)] = x_.at(r, node.feature) < node.threshold ? node.left : node.right;
            }
            frontier = std::move(next);
        }
        return tree;
    }

private:
    /// Per-node gradient sums accumulated in row order.
    std::vector<NodeSums> node_sums(const RegressionTree& tree, const std::vector<int>& position, std::span<const double> grad,
                                    std::span<const double> hess) const {
        std::vector<NodeSums> sums(tree.nodes.size());
        for (std::size_t r = 0; r < position.size(); ++r) {
            auto& s = sums[static_cast<std::size_t>(position[r])];
            s.g += grad[r];
            s.h += hess[r];
        }
        return sums;
    }

    const FeatureMatrix& x_;
    const BoostParams& params_;
    std::vector<std::vector<int>> sorted_;
};

/// Sorts each node's rows per feature. Slow; kept as the reference the
/// level-wise builder is tested against. Nodes are numbered breadth-first
/// so both builders lay out identical trees.
class RecursiveBuilder {
public:
    RecursiveBuilder(const FeatureMatrix& x, const BoostParams& params) : x_(x), params_(params) {}

    RegressionTree build(std::span<const double> grad, std::span<const double> hess) const {
        struct Pending {
            int id;
            std::vector<int> rows;
            int depth;
        };
        RegressionTree tree;
        tree.nodes.emplace_back();
        std::deque<Pending> queue;
        queue.push_back({0, std::vector<int>(static_cast<std::size_t>(x_.rows())), 0});
        std::iota(queue.front().rows.begin(), queue.front().rows.end(), 0);
        while (!queue.empty()) {
            Pending p = std::move(queue.front());
            queue.pop_front();
            const Split best = find_split(p.rows, p.depth, grad, hess);
            if (best.feature < 0) {
                tree.nodes[static_cast<std::size_t>(p.id)].value = leaf_value(sums(p.rows, grad, hess), params_);
                continue;
            }
            std::vector<int> left_rows, right_rows;
            for (int r : p.rows)
                (x_.at(r, best.feature) < best.threshold ? left_rows : right_rows).push_back(r);
            const int left = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            auto& node = tree.nodes[static_cast<std::size_t>(p.id)];
            node.feature = best.feature;
            node.threshold = best.threshold;
            node.left = left;
            node.right = left + 1;
            queue.push_back({left, std::move(left_rows), p.depth + 1});
            queue.push_back({left + 1, std::move(right_rows), p.depth + 1});
        }
        return tree;
    }

private:
    static NodeSums sums(const std::vector<int>& rows, std::span<const double> grad, std::span<const double> hess) {
        NodeSums s;
        for (int r : rows) {
            s.g += grad[static_cast<std::size_t>(r)];
            s.h += hess[static_cast<std::size_t>(r)];
        }
        return s;
    }

    /// feature < 0 when the node should be a leaf.
    Split find_split(const std::vector<int>& rows, int depth, std::span<const double> grad, std::span<const double> hess) const {
        Split best;
        if (depth >= params_.max_depth)
            return best;
        const NodeSums s = sums(rows, grad, hess);
        const Objective obj{params_.lambda, params_.gamma, params_.min_child_weight};
        std::vector<int> order;
        for (int c = 0; c < x_.cols(); ++c) {
            order = rows;
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return x_.at(a, c) < x_.at(b, c); });
            double gl = 0.0, hl = 0.0;
            for (std::size_t i = 0; i < order.size(); ++i) {
                const int r = order[i];
                if (i > 0 && x_.at(r, c) != x_.at(order[i - 1], c))
                    obj.offer(best, c, 0.5 * (x_.at(order[i - 1], c) + x_.at(r, c)), s.g, s.h, gl, hl);
                gl += grad[static_cast<std::size_t>(r)];
                hl += hess[static_cast<std::size_t>(r)];
            }
        }
        if (best.gain <= kMinGain)
            best.feature = -1;
        return best;
    }

    const FeatureMatrix& x_;
    const BoostParams& params_;
};

double log_loss(std::span<const double> margin, std::span<const int> labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < margin.size(); ++i) {
        // log(1 + e^-m) for y=1, log(1 + e^m) for y=0, computed stably.
        const double m = labels[i] ? margin[i] : -margin[i];
        total += m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    }
    return margin.empty() ? 0.0 : total / static_cast<double>(margin.size());
}

} // namespace

TreeEnsembleModel train_gbdt(const FeatureMatrix& x, std::span<const int> labels, const BoostParams& params, SplitSearch search) {
    if (static_cast<int>(labels.size()) != x.rows())
        throw LengthMismatch("train_gbdt: label count differs from row count");
    const auto positives = std::count_if(labels.begin(), labels.end(), [](int y) { return y != 0; });
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size()))
        throw DegenerateLabels("training needs at least one example of each class");
    if (!(params.base_score > 0.0 && params.base_score < 1.0) || params.max_depth < 0 || params.n_rounds < 0)
        throw ConfigError("invalid boosting parameters");

    TreeEnsembleModel model;
    model.learning_rate = params.learning_rate;
    model.n_features = x.cols();
    model.base_margin = std::log(params.base_score / (1.0 - params.base_score));

    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<double> margin(n, model.base_margin), grad(n), hess(n);
    std::optional<LevelWiseBuilder> level_wise;
    if (search == SplitSearch::Parallel)
        level_wise.emplace(x, params);
    const RecursiveBuilder recursive(x, params);

    for (int round = 0; round < params.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(margin[i]);
            grad[i] = p - (labels[i] ? 1.0 : 0.0);
            hess[i] = std::max(p * (1.0 - p), 1e-16);
        }
        RegressionTree tree = level_wise ? level_wise->build(grad, hess) : recursive.build(grad, hess);
        for (std::size_t i = 0; i < n; ++i)
            margin[i] += tree.predict(x.row(static_cast<int>(i)));
        model.trees.push_back(std::move(tree));
        model.training_loss.push_back(log_loss(margin, labels));
    }
    model.n_rounds = static_cast<int>(model.trees.size());
    return model;
}

} // namespace ml4c
