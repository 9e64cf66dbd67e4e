#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace ml4c::oracle {

namespace {

std::vector<std::vector<NodeId>> undirected_adjacency(const Dag& dag) {
    std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(dag.size()));
    for (const auto& [a, b] : dag.edges()) {
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    }
    return adj;
}

bool has_arc(const std::vector<Edge>& edges, NodeId a, NodeId b) {
    return std::find(edges.begin(), edges.end(), Edge{a, b}) != edges.end();
}

bool acyclic(int n, const std::vector<Edge>& edges) {
    // Repeatedly strip sinks.
    std::vector<bool> gone(static_cast<std::size_t>(n), false);
    for (int removed = 0; removed < n;) {
        bool progress = false;
        for (int v = 0; v < n; ++v) {
            if (gone[static_cast<std::size_t>(v)])
                continue;
            const bool sink = std::none_of(edges.begin(), edges.end(), [&](const Edge& e) {
                return e.first == v && !gone[static_cast<std::size_t>(e.second)];
            });
            if (sink) {
                gone[static_cast<std::size_t>(v)] = true;
                ++removed;
                progress = true;
            }
        }
        if (!progress)
            return false;
    }
    return true;
}

std::set<std::array<int, 3>> colliders(int n, const std::vector<Edge>& edges) {
    auto adjacent = [&](int a, int b) { return has_arc(edges, a, b) || has_arc(edges, b, a); };
    std::set<std::array<int, 3>> out;
    for (int t = 0; t < n; ++t)
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (has_arc(edges, a, t) && has_arc(edges, b, t) && !adjacent(a, b))
                    out.insert({a, t, b});
    return out;
}

} // namespace

bool d_connected_by_paths(const Dag& dag, NodeId x, NodeId y, const NodeSet& z) {
    const int n = dag.size();
    const auto adj = undirected_adjacency(dag);
    std::vector<std::set<NodeId>> desc(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v) {
        std::vector<NodeId> stack{v};
        while (!stack.empty()) {
            const NodeId u = stack.back();
            stack.pop_back();
            if (!desc[static_cast<std::size_t>(v)].insert(u).second)
                continue;
            for (NodeId c : dag.children(u))
                stack.push_back(c);
        }
    }
    const std::set<NodeId> zs(z.begin(), z.end());
    auto collider_open = [&](NodeId v) {
        return std::any_of(desc[static_cast<std::size_t>(v)].begin(), desc[static_cast<std::size_t>(v)].end(),
                           [&](NodeId d) { return zs.count(d) > 0; });
    };
    std::vector<NodeId> path{x};
    std::vector<bool> on_path(static_cast<std::size_t>(n), false);
    on_path[static_cast<std::size_t>(x)] = true;
    std::function<bool()> extend = [&]() -> bool {
        const NodeId last = path.back();
        if (last == y)
            return true;
        for (NodeId next : adj[static_cast<std::size_t>(last)]) {
            if (on_path[static_cast<std::size_t>(next)])
                continue;
            if (path.size() >= 2) {
                const NodeId prev = path[path.size() - 2];
                const bool is_collider = dag.has_edge(prev, last) && dag.has_edge(next, last);
                if (is_collider ? !collider_open(last) : zs.count(last) > 0)
                    continue;
            }
            path.push_back(next);
            on_path[static_cast<std::size_t>(next)] = true;
            const bool found = extend();
            on_path[static_cast<std::size_t>(next)] = false;
            path.pop_back();
            if (found)
                return true;
        }
        return false;
    };
    return extend();
}

std::vector<Dag> markov_equivalence_class(const Dag& dag) {
    const int n = dag.size();
    const auto& edges = dag.edges();
    const std::size_t m = edges.size();
    if (m > 20)
        throw std::invalid_argument("markov_equivalence_class: too many edges to enumerate");
    const auto target = colliders(n, edges);
    std::vector<Dag> out;
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        std::vector<Edge> oriented;
        for (std::size_t i = 0; i < m; ++i) {
            const auto [a, b] = edges[i];
            oriented.push_back((mask >> i) & 1u ? Edge{b, a} : Edge{a, b});
        }
        if (acyclic(n, oriented) && colliders(n, oriented) == target)
            out.emplace_back(dag.names(), oriented);
    }
    return out;
}

Pdag cpdag_by_enumeration(const Dag& dag) {
    const auto mec = markov_equivalence_class(dag);
    std::vector<Edge> directed, undirected;
    for (const auto& [a, b] : dag.edges()) {
        const bool all_forward = std::all_of(mec.begin(), mec.end(), [&](const Dag& g) { return g.has_edge(a, b); });
        const bool all_backward = std::all_of(mec.begin(), mec.end(), [&](const Dag& g) { return g.has_edge(b, a); });
        if (all_forward)
            directed.emplace_back(a, b);
        else if (all_backward)
            directed.emplace_back(b, a);
        else
            undirected.emplace_back(std::min(a, b), std::max(a, b));
    }
    return Pdag(dag.names(), directed, undirected);
}

CiResult g2_naive(const DiscreteDataset& data, NodeId x, NodeId y, const NodeSet& z, double min_per_dof) {
    std::map<std::vector<int>, std::map<std::pair<int, int>, long>> strata;
    for (int r = 0; r < data.n_rows(); ++r) {
        std::vector<int> key;
        for (NodeId v : z)
            key.push_back(data.at(r, v));
        ++strata[key][{data.at(r, x), data.at(r, y)}];
    }
    double g = 0.0;
    long dof = 0;
    for (const auto& [key, cells] : strata) {
        std::map<int, long> rows, cols;
        long n = 0;
        for (const auto& [ab, count] : cells) {
            rows[ab.first] += count;
            cols[ab.second] += count;
            n += count;
        }
        dof += (static_cast<long>(rows.size()) - 1) * (static_cast<long>(cols.size()) - 1);
        for (const auto& [ab, count] : cells) {
            const double e = static_cast<double>(rows[ab.first]) * static_cast<double>(cols[ab.second]) / static_cast<double>(n);
            g += 2.0 * static_cast<double>(count) * std::log(static_cast<double>(count) / e);
        }
    }
    CiResult r;
    r.statistic = std::max(0.0, g);
    r.dof = static_cast<int>(dof);
    if (dof == 0 || static_cast<double>(data.n_rows()) < min_per_dof * static_cast<double>(dof)) {
        r.p_value = 1.0;
        r.degenerate = true;
    } else {
        r.p_value = chi2_sf(r.statistic, r.dof);
    }
    r.severity = severity_bisect(r.p_value);
    return r;
}

double chi2_sf(double stat, int dof) {
    if (stat <= 0.0)
        return 1.0;
    // P(a, x) = x^a e^-x sum_k x^k / Gamma(a + k + 1)
    const double a = 0.5 * dof;
    const double x = 0.5 * stat;
    double sum = 0.0;
    for (int k = 0; k < 100000; ++k) {
        const double term = std::exp(a * std::log(x) - x + k * std::log(x) - std::lgamma(a + k + 1.0));
        sum += term;
        if (k > x && term < 1e-17 * sum)
            break;
    }
    return std::clamp(1.0 - sum, 0.0, 1.0);
}

double severity_bisect(double p) {
    if (p >= 1.0)
        return 0.0;
    double lo = 0.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (std::erfc(mid / std::sqrt(2.0)) > p)
            lo = mid;
        else
            hi = mid;
    }
    return std::min(0.5 * (lo + hi), kSeverityCap);
}

double embedding_mean(std::span<const double> values, double w, double b) {
    if (values.empty())
        return 0.0;
    long double acc = 0.0L;
    for (double v : values)
        acc += std::cos(static_cast<long double>(w) * v + b);
    return static_cast<double>(acc / static_cast<long double>(values.size()));
}

EdgeConfusion confusion_naive(const Pdag& truth, const Pdag& predicted) {
    enum State { Absent, Undirected, Directed };
    auto state = [](const Pdag& g, NodeId a, NodeId b, Edge* dir) {
        for (const auto& e : g.directed_edges())
            if ((e.first == a && e.second == b) || (e.first == b && e.second == a)) {
                *dir = e;
                return Directed;
            }
        for (const auto& e : g.undirected_edges())
            if ((e.first == a && e.second == b) || (e.first == b && e.second == a))
                return Undirected;
        return Absent;
    };
    EdgeConfusion c;
    for (NodeId a = 0; a < truth.size(); ++a)
        for (NodeId b = a + 1; b < truth.size(); ++b) {
            Edge td{}, pd{};
            const State t = state(truth, a, b, &td);
            const State p = state(predicted, a, b, &pd);
            int cell = 0;
            if (t == Directed)
                cell = p == Directed ? (td == pd ? 1 : 2) : p == Undirected ? 3 : 4;
            else if (t == Undirected)
                cell = p == Directed ? 5 : p == Undirected ? 6 : 7;
            else
                cell = p == Directed ? 8 : p == Undirected ? 9 : 10;
            ++c[cell];
        }
    return c;
}

bool conflict_free(std::span<const VCandidate> candidates) {
    for (std::size_t i = 0; i < candidates.size(); ++i)
        for (std::size_t j = i + 1; j < candidates.size(); ++j) {
            const auto& a = candidates[i].triple;
            const auto& b = candidates[j].triple;
            const Edge arrows_a[] = {{a.x, a.t}, {a.y, a.t}};
            const Edge arrows_b[] = {{b.x, b.t}, {b.y, b.t}};
            for (const auto& ea : arrows_a)
                for (const auto& eb : arrows_b)
                    if (ea.first == eb.second && ea.second == eb.first)
                        return false;
        }
    return true;
}

double max_weight_conflict_free(std::span<const VCandidate> candidates) {
    const std::size_t n = candidates.size();
    if (n > 20)
        throw std::invalid_argument("max_weight_conflict_free: too many candidates");
    double best = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<VCandidate> subset;
        double w = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if ((mask >> i) & 1u) {
                subset.push_back(candidates[i]);
                w += candidates[i].score;
            }
        if (w > best && conflict_free(subset))
            best = w;
    }
    return best;
}

} // namespace ml4c::oracle
