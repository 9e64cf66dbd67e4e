#pragma once

// Synthetic discrete Bayesian networks: random DAGs (Erdos-Renyi or
// scale-free), cardinalities, Dirichlet CPTs and forward sampling.

#include "ml4c/graph.hpp"
#include "ml4c/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ml4c {

using Value = std::uint16_t;

/// Integer-coded categorical samples, stored column-major.
class DiscreteDataset {
public:
    DiscreteDataset() = default;
    /// `columns[c][r]` is the value of column c in row r. Throws DataError if
    /// a value is out of its column's range or columns differ in length.
    DiscreteDataset(std::vector<std::string> names, std::vector<int> cardinalities, std::vector<std::vector<Value>> columns);

    int n_rows() const noexcept { return n_rows_; }
    int n_cols() const noexcept { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::vector<int>& cardinalities() const noexcept { return cardinalities_; }
    int cardinality(int col) const { return cardinalities_[static_cast<std::size_t>(col)]; }
    std::span<const Value> column(int col) const { return columns_[static_cast<std::size_t>(col)]; }
    Value at(int row, int col) const { return columns_[static_cast<std::size_t>(col)][static_cast<std::size_t>(row)]; }

    friend bool operator==(const DiscreteDataset&, const DiscreteDataset&) = default;

private:
    std::vector<std::string> names_;
    std::vector<int> cardinalities_;
    std::vector<std::vector<Value>> columns_;
    int n_rows_ = 0;
};

/// P(node | parents). Rows are indexed by the parent assignment in mixed
/// radix over `parents` (sorted), the last parent varying fastest.
struct Cpt {
    NodeId node = 0;
    int cardinality = 2;
    NodeSet parents;
    std::vector<int> parent_cardinalities;
    /// rows() * cardinality entries, row-major.
    std::vector<double> table;

    int rows() const noexcept { return cardinality == 0 ? 0 : static_cast<int>(table.size()) / cardinality; }
    std::span<const double> row(int r) const {
        return std::span<const double>(table).subspan(static_cast<std::size_t>(r * cardinality), static_cast<std::size_t>(cardinality));
    }
    /// Row index for parent values listed in `parents` order.
    int row_index(std::span<const int> parent_values) const;
};

struct BayesNet {
    Dag dag;
    std::vector<int> cardinalities;
    std::vector<Cpt> cpts;
    /// Optional state labels per node (filled by the BIF reader).
    std::vector<std::vector<std::string>> state_names;

    /// Throws DataError when CPTs disagree with the DAG or rows are not
    /// distributions within 1e-9.
    void validate() const;
};

enum class GraphModel { ER, SF, Mixed };

std::string to_string(GraphModel m);
GraphModel graph_model_from_string(const std::string& s);

struct SynthConfig {
    std::pair<int, int> node_count_range{10, 20};
    /// Average edges per node.
    std::pair<double, double> sparsity_range{1.2, 1.7};
    GraphModel graph_model = GraphModel::Mixed;
    int sample_size = 10000;
    std::pair<double, double> dirichlet_alpha_range{0.1, 1.0};
    std::uint64_t seed = 0;

    /// Throws ConfigError.
    void validate() const;
};

/// Random DAG: draws d and the edge count from the config, builds an ER
/// (uniform edge subset) or SF (preferential attachment) skeleton and
/// orients it along a random node permutation.
Dag gen_dag(const SynthConfig& config, Rng& rng);

/// Same, with node count, target edge count and model fixed.
Dag gen_dag(int nodes, int edges, GraphModel model, Rng& rng);

/// Per node: round(N(2, 1.5/m)) drawn until >= 2, where m is the largest
/// in-degree among the node's children (1 when childless).
std::vector<int> gen_cardinalities(const Dag& dag, Rng& rng);

/// One alpha ~ U(alpha_range) per node; every parent configuration gets an
/// independent symmetric Dirichlet(alpha) row.
std::vector<Cpt> gen_cpts(const Dag& dag, std::span<const int> cardinalities, Rng& rng,
                          std::pair<double, double> alpha_range = {0.1, 1.0});

BayesNet gen_bayes_net(const SynthConfig& config, Rng& rng);

DiscreteDataset forward_sample(const BayesNet& bn, int n, Rng& rng);

struct CorpusItem {
    BayesNet net;
    DiscreteDataset data;
    std::uint64_t seed = 0;
    GraphModel model = GraphModel::ER;
};

/// n_graphs independent networks with samples. Item i is generated from
/// derive_seed(config.seed, i) alone; Mixed alternates ER (even i) and SF.
std::vector<CorpusItem> build_corpus(const SynthConfig& config, int n_graphs);

} // namespace ml4c
