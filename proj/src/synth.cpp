#include "ml4c/synth.hpp"

#include "ml4c/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ml4c {

DiscreteDataset::DiscreteDataset(std::vector<std::string> names, std::vector<int> cardinalities, std::vector<std::vector<Value>> columns)
    : names_(std::move(names)), cardinalities_(std::move(cardinalities)), columns_(std::move(columns)) {
    if (names_.size() != cardinalities_.size() || names_.size() != columns_.size())
        throw DataError("dataset: names, cardinalities and columns differ in count");
    n_rows_ = columns_.empty() ? 0 : static_cast<int>(columns_.front().size());
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (static_cast<int>(columns_[c].size()) != n_rows_)
            throw DataError("dataset: ragged columns");
        const int card = cardinalities_[c];
        if (card < 1 || card > std::numeric_limits<Value>::max())
            throw DataError("dataset: invalid cardinality for column " + names_[c]);
        for (Value v : columns_[c])
            if (v >= card)
                throw DataError("dataset: value " + std::to_string(v) + " out of range in column " + names_[c]);
    }
}

int Cpt::row_index(std::span<const int> parent_values) const {
    int index = 0;
    for (std::size_t i = 0; i < parent_cardinalities.size(); ++i)
        index = index * parent_cardinalities[i] + parent_values[i];
    return index;
}

void BayesNet::validate() const {
    const int n = dag.size();
    if (static_cast<int>(cardinalities.size()) != n || static_cast<int>(cpts.size()) != n)
        throw DataError("bayes net: per-node arrays do not match node count");
    for (NodeId v = 0; v < n; ++v) {
        const Cpt& cpt = cpts[static_cast<std::size_t>(v)];
        if (cpt.node != v || cpt.cardinality != cardinalities[static_cast<std::size_t>(v)] || cpt.parents != dag.parents(v))
            throw DataError("bayes net: CPT of " + dag.names()[static_cast<std::size_t>(v)] + " inconsistent with graph");
        std::size_t rows = 1;
        for (std::size_t i = 0; i < cpt.parents.size(); ++i) {
            if (cpt.parent_cardinalities[i] != cardinalities[static_cast<std::size_t>(cpt.parents[i])])
                throw DataError("bayes net: parent cardinality mismatch");
            rows *= static_cast<std::size_t>(cpt.parent_cardinalities[i]);
        }
        if (cpt.table.size() != rows * static_cast<std::size_t>(cpt.cardinality))
            throw DataError("bayes net: CPT table has wrong size");
        for (int r = 0; r < cpt.rows(); ++r) {
            double total = 0.0;
            for (double p : cpt.row(r)) {
                if (!(p >= 0.0))
                    throw DataError("bayes net: negative probability");
                total += p;
            }
            if (std::abs(total - 1.0) > 1e-9)
                throw DataError("bayes net: CPT row does not sum to 1");
        }
    }
}

std::string to_string(GraphModel m) {
    switch (m) {
    case GraphModel::ER: return "ER";
    case GraphModel::SF: return "SF";
    case GraphModel::Mixed: return "mixed";
    }
    return "?";
}

GraphModel graph_model_from_string(const std::string& s) {
    if (s == "ER" || s == "er")
        return GraphModel::ER;
    if (s == "SF" || s == "sf")
        return GraphModel::SF;
    if (s == "mixed")
        return GraphModel::Mixed;
    throw ConfigError("unknown graph model '" + s + "' (expected ER, SF or mixed)");
}

void SynthConfig::validate() const {
    const auto [dmin, dmax] = node_count_range;
    if (dmin < 2 || dmax < dmin)
        throw ConfigError("node_count_range must satisfy 2 <= min <= max");
    const auto [smin, smax] = sparsity_range;
    if (!(smin > 0.0) || smax < smin || !(smax < static_cast<double>(dmin)))
        throw ConfigError("sparsity_range must lie in (0, node count)");
    const auto [amin, amax] = dirichlet_alpha_range;
    if (!(amin > 0.0) || amax < amin)
        throw ConfigError("dirichlet_alpha_range must be positive and non-empty");
    if (sample_size < 1)
        throw ConfigError("sample_size must be positive");
}

namespace {

std::vector<Edge> er_skeleton(int d, int m, Rng& rng) {
    std::vector<Edge> pairs;
    pairs.reserve(static_cast<std::size_t>(d) * static_cast<std::size_t>(d - 1) / 2);
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b)
            pairs.emplace_back(a, b);
    for (int i = 0; i < m; ++i) {
        const auto j = rng.uniform_int(i, static_cast<std::int64_t>(pairs.size()) - 1);
        std::swap(pairs[static_cast<std::size_t>(i)], pairs[static_cast<std::size_t>(j)]);
    }
    pairs.resize(static_cast<std::size_t>(m));
    return pairs;
}

std::vector<Edge> sf_skeleton(int d, int m, Rng& rng) {
    // attach[i] <= i edges to earlier nodes, summing to exactly m.
    const int k = std::max(1, m / d);
    std::vector<int> attach(static_cast<std::size_t>(d), 0);
    int base = 0;
    for (int i = 1; i < d; ++i) {
        attach[static_cast<std::size_t>(i)] = std::min(i, k);
        base += attach[static_cast<std::size_t>(i)];
    }
    for (int i = d - 1; base > m; i = i > 1 ? i - 1 : d - 1)
        if (attach[static_cast<std::size_t>(i)] > 0) {
            --attach[static_cast<std::size_t>(i)];
            --base;
        }
    std::vector<int> room;
    for (int extra = m - base; extra > 0; --extra) {
        room.clear();
        for (int i = 1; i < d; ++i)
            if (attach[static_cast<std::size_t>(i)] < i)
                room.push_back(i);
        const auto j = rng.uniform_int(0, static_cast<std::int64_t>(room.size()) - 1);
        ++attach[static_cast<std::size_t>(room[static_cast<std::size_t>(j)])];
    }

    std::vector<int> degree(static_cast<std::size_t>(d), 0);
    std::vector<std::uint8_t> adjacency(static_cast<std::size_t>(d) * static_cast<std::size_t>(d), 0);
    std::vector<Edge> edges;
    for (int i = 1; i < d; ++i) {
        std::vector<int> chosen;
        for (int a = 0; a < attach[static_cast<std::size_t>(i)]; ++a) {
            double total = 0.0;
            for (int j = 0; j < i; ++j)
                if (std::find(chosen.begin(), chosen.end(), j) == chosen.end())
                    total += degree[static_cast<std::size_t>(j)] + 1.0;
            double u = rng.uniform01() * total;
            int pick = -1;
            for (int j = 0; j < i; ++j) {
                if (std::find(chosen.begin(), chosen.end(), j) != chosen.end())
                    continue;
                pick = j;
                u -= degree[static_cast<std::size_t>(j)] + 1.0;
                if (u < 0.0)
                    break;
            }
            chosen.push_back(pick);
        }
        for (int j : chosen) {
            edges.emplace_back(j, i);
            ++degree[static_cast<std::size_t>(j)];
            ++degree[static_cast<std::size_t>(i)];
            adjacency[static_cast<std::size_t>(j) * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] = 1;
        }
    }
    // Whatever attachment could not absorb is placed uniformly.
    if (static_cast<int>(edges.size()) < m) {
        std::vector<Edge> free;
        for (int a = 0; a < d; ++a)
            for (int b = a + 1; b < d; ++b)
                if (!adjacency[static_cast<std::size_t>(a) * static_cast<std::size_t>(d) + static_cast<std::size_t>(b)])
                    free.emplace_back(a, b);
        const int need = m - static_cast<int>(edges.size());
        for (int i = 0; i < need; ++i) {
            const auto j = rng.uniform_int(i, static_cast<std::int64_t>(free.size()) - 1);
            std::swap(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
            edges.push_back(free[static_cast<std::size_t>(i)]);
        }
    }
    return edges;
}

} // namespace

Dag gen_dag(int nodes, int edges, GraphModel model, Rng& rng) {
    if (nodes < 1)
        throw ConfigError("gen_dag: need at least one node");
    const int max_edges = nodes * (nodes - 1) / 2;
    const int m = std::clamp(edges, 0, max_edges);
    if (model == GraphModel::Mixed)
        model = rng.uniform01() < 0.5 ? GraphModel::ER : GraphModel::SF;
    std::vector<Edge> skeleton = model == GraphModel::ER ? er_skeleton(nodes, m, rng) : sf_skeleton(nodes, m, rng);

    const auto perm = rng.permutation(nodes);
    std::vector<int> rank(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i)
        rank[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i;
    for (auto& [a, b] : skeleton)
        if (rank[static_cast<std::size_t>(a)] > rank[static_cast<std::size_t>(b)])
            std::swap(a, b);
    return Dag(nodes, std::move(skeleton));
}

Dag gen_dag(const SynthConfig& config, Rng& rng) {
    config.validate();
    const auto d = static_cast<int>(rng.uniform_int(config.node_count_range.first, config.node_count_range.second));
    const double sparsity = rng.uniform(config.sparsity_range.first, config.sparsity_range.second);
    const auto m = static_cast<int>(std::lround(sparsity * d));
    return gen_dag(d, m, config.graph_model, rng);
}

std::vector<int> gen_cardinalities(const Dag& dag, Rng& rng) {
    std::vector<int> cards(static_cast<std::size_t>(dag.size()));
    for (NodeId v = 0; v < dag.size(); ++v) {
        std::size_t peers = 1;
        for (NodeId c : dag.children(v))
            peers = std::max(peers, dag.parents(c).size());
        const double sigma = 1.5 / static_cast<double>(peers);
        double x;
        do {
            x = rng.normal(2.0, sigma);
        } while (x < 2.0);
        cards[static_cast<std::size_t>(v)] = static_cast<int>(std::lround(x));
    }
    return cards;
}

std::vector<Cpt> gen_cpts(const Dag& dag, std::span<const int> cardinalities, Rng& rng, std::pair<double, double> alpha_range) {
    std::vector<Cpt> cpts;
    cpts.reserve(static_cast<std::size_t>(dag.size()));
    for (NodeId v = 0; v < dag.size(); ++v) {
        Cpt cpt;
        cpt.node = v;
        cpt.cardinality = cardinalities[static_cast<std::size_t>(v)];
        cpt.parents = dag.parents(v);
        std::size_t rows = 1;
        for (NodeId p : cpt.parents) {
            cpt.parent_cardinalities.push_back(cardinalities[static_cast<std::size_t>(p)]);
            rows *= static_cast<std::size_t>(cardinalities[static_cast<std::size_t>(p)]);
        }
        const double alpha = rng.uniform(alpha_range.first, alpha_range.second);
        cpt.table.reserve(rows * static_cast<std::size_t>(cpt.cardinality));
        for (std::size_t r = 0; r < rows; ++r) {
            const auto dist = rng.dirichlet(alpha, cpt.cardinality);
            cpt.table.insert(cpt.table.end(), dist.begin(), dist.end());
        }
        cpts.push_back(std::move(cpt));
    }
    return cpts;
}

BayesNet gen_bayes_net(const SynthConfig& config, Rng& rng) {
    BayesNet bn;
    bn.dag = gen_dag(config, rng);
    bn.cardinalities = gen_cardinalities(bn.dag, rng);
    bn.cpts = gen_cpts(bn.dag, bn.cardinalities, rng, config.dirichlet_alpha_range);
    return bn;
}

DiscreteDataset forward_sample(const BayesNet& bn, int n, Rng& rng) {
    if (n < 1)
        throw ConfigError("forward_sample: n must be positive");
    const int d = bn.dag.size();
    std::vector<std::vector<Value>> columns(static_cast<std::size_t>(d), std::vector<Value>(static_cast<std::size_t>(n)));
    const auto& order = bn.dag.order();
    std::vector<int> parent_values;
    for (int r = 0; r < n; ++r) {
        for (NodeId v : order) {
            const Cpt& cpt = bn.cpts[static_cast<std::size_t>(v)];
            parent_values.clear();
            for (NodeId p : cpt.parents)
                parent_values.push_back(columns[static_cast<std::size_t>(p)][static_cast<std::size_t>(r)]);
            const auto row = cpt.row(cpt.row_index(parent_values));
            double u = rng.uniform01();
            int value = cpt.cardinality - 1;
            for (int k = 0; k < cpt.cardinality; ++k) {
                u -= row[static_cast<std::size_t>(k)];
                if (u < 0.0) {
                    value = k;
                    break;
                }
            }
            // Zero-probability tail states are never drawn by rounding error.
            while (value > 0 && row[static_cast<std::size_t>(value)] == 0.0)
                --value;
            columns[static_cast<std::size_t>(v)][static_cast<std::size_t>(r)] = static_cast<Value>(value);
        }
    }
    return DiscreteDataset(bn.dag.names(), bn.cardinalities, std::move(columns));
}

std::vector<CorpusItem> build_corpus(const SynthConfig& config, int n_graphs) {
    config.validate();
    if (n_graphs < 0)
        throw ConfigError("build_corpus: n_graphs must be non-negative");
    std::vector<CorpusItem> items(static_cast<std::size_t>(n_graphs));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n_graphs; ++i) {
        CorpusItem& item = items[static_cast<std::size_t>(i)];
        item.seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
        SynthConfig local = config;
        if (local.graph_model == GraphModel::Mixed)
            local.graph_model = (i % 2 == 0) ? GraphModel::ER : GraphModel::SF;
        item.model = local.graph_model;
        Rng rng(item.seed);
        item.net = gen_bayes_net(local, rng);
        item.data = forward_sample(item.net, config.sample_size, rng);
    }
    return items;
}

} // namespace ml4c
