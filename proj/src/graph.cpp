#include "ml4c/graph.hpp"

#include "ml4c/errors.hpp"

#include <algorithm>
#include <deque>
#include <queue>

namespace ml4c {

namespace {

void check_names(const std::vector<std::string>& names) {
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw InvalidNodes("duplicate node name");
}

void check_endpoints(int n, const Edge& e) {
    if (e.first < 0 || e.second < 0 || e.first >= n || e.second >= n)
        throw InvalidNodes("edge endpoint out of range: (" + std::to_string(e.first) + ", " + std::to_string(e.second) + ")");
    if (e.first == e.second)
        throw InvalidNodes("self-loop on node " + std::to_string(e.first));
}

std::size_t cell(int n, NodeId a, NodeId b) {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(n) + static_cast<std::size_t>(b);
}

} // namespace

NodeSet make_node_set(std::vector<NodeId> nodes) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

bool contains(const NodeSet& set, NodeId v) { return std::binary_search(set.begin(), set.end(), v); }

std::vector<std::string> default_node_names(int n) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        names.push_back("X" + std::to_string(i));
    return names;
}

// ---------------------------------------------------------------- Dag

Dag::Dag(std::vector<std::string> names, std::vector<Edge> edges) : names_(std::move(names)), edges_(std::move(edges)) {
    check_names(names_);
    const int n = size();
    for (const auto& e : edges_)
        check_endpoints(n, e);
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
        throw InvalidNodes("duplicate edge");
    order_ = topological_order(n, edges_);
    parents_.resize(static_cast<std::size_t>(n));
    children_.resize(static_cast<std::size_t>(n));
    for (const auto& [p, c] : edges_) {
        if (std::binary_search(edges_.begin(), edges_.end(), Edge{c, p}))
            throw CycleDetected("edge in both directions");
        parents_[static_cast<std::size_t>(c)].push_back(p);
        children_[static_cast<std::size_t>(p)].push_back(c);
    }
    for (auto& s : parents_)
        std::sort(s.begin(), s.end());
    for (auto& s : children_)
        std::sort(s.begin(), s.end());
}

bool Dag::has_edge(NodeId from, NodeId to) const { return contains(children(from), to); }

// ---------------------------------------------------------------- Skeleton

Skeleton::Skeleton(std::vector<std::string> names, std::vector<Edge> edges) : names_(std::move(names)) {
    check_names(names_);
    const int n = size();
    edges_.reserve(edges.size());
    for (auto e : edges) {
        check_endpoints(n, e);
        if (e.first > e.second)
            std::swap(e.first, e.second);
        edges_.push_back(e);
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
        throw InvalidNodes("duplicate undirected edge");
    neighbors_.resize(static_cast<std::size_t>(n));
    adjacency_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
    for (const auto& [a, b] : edges_) {
        neighbors_[static_cast<std::size_t>(a)].push_back(b);
        neighbors_[static_cast<std::size_t>(b)].push_back(a);
        adjacency_[cell(n, a, b)] = 1;
        adjacency_[cell(n, b, a)] = 1;
    }
    for (auto& s : neighbors_)
        std::sort(s.begin(), s.end());
}

// ---------------------------------------------------------------- Pdag

Pdag::Pdag(std::vector<std::string> names, std::vector<Edge> directed, std::vector<Edge> undirected)
    : names_(std::move(names)), directed_(std::move(directed)), undirected_(std::move(undirected)) {
    check_names(names_);
    const int n = size();
    marks_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), static_cast<std::uint8_t>(EdgeMark::None));
    auto claim = [&](NodeId a, NodeId b, EdgeMark ab, EdgeMark ba) {
        if (marks_[cell(n, a, b)] != static_cast<std::uint8_t>(EdgeMark::None))
            throw InvalidNodes("pair (" + std::to_string(a) + ", " + std::to_string(b) + ") listed twice");
        marks_[cell(n, a, b)] = static_cast<std::uint8_t>(ab);
        marks_[cell(n, b, a)] = static_cast<std::uint8_t>(ba);
    };
    for (const auto& e : directed_) {
        check_endpoints(n, e);
        claim(e.first, e.second, EdgeMark::Forward, EdgeMark::Backward);
    }
    for (auto& e : undirected_) {
        check_endpoints(n, e);
        if (e.first > e.second)
            std::swap(e.first, e.second);
        claim(e.first, e.second, EdgeMark::Undirected, EdgeMark::Undirected);
    }
    std::sort(directed_.begin(), directed_.end());
    std::sort(undirected_.begin(), undirected_.end());
    topological_order(n, directed_);
}

Pdag Pdag::from_skeleton(const Skeleton& skel) { return Pdag(skel.names(), {}, skel.edges()); }

Skeleton Pdag::skeleton() const {
    std::vector<Edge> all = undirected_;
    all.insert(all.end(), directed_.begin(), directed_.end());
    return Skeleton(names_, std::move(all));
}

// ---------------------------------------------------------------- algorithms

std::vector<NodeId> topological_order(int n, std::span<const Edge> edges) {
    std::vector<std::vector<NodeId>> out(static_cast<std::size_t>(n));
    std::vector<int> indegree(static_cast<std::size_t>(n), 0);
    for (const auto& e : edges) {
        check_endpoints(n, e);
        out[static_cast<std::size_t>(e.first)].push_back(e.second);
        ++indegree[static_cast<std::size_t>(e.second)];
    }
    // Min-heap keeps the order deterministic and smallest-index-first.
    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
    for (NodeId v = 0; v < n; ++v)
        if (indegree[static_cast<std::size_t>(v)] == 0)
            ready.push(v);
    std::vector<NodeId> order;
    order.reserve(static_cast<std::size_t>(n));
    while (!ready.empty()) {
        const NodeId v = ready.top();
        ready.pop();
        order.push_back(v);
        for (NodeId c : out[static_cast<std::size_t>(v)])
            if (--indegree[static_cast<std::size_t>(c)] == 0)
                ready.push(c);
    }
    if (static_cast<int>(order.size()) != n)
        throw CycleDetected("directed cycle among " + std::to_string(n - static_cast<int>(order.size())) + " nodes");
    return order;
}

std::vector<NodeId> topological_order(const Dag& dag) { return dag.order(); }

bool d_separated(const Dag& dag, NodeId x, NodeId y, std::span<const NodeId> z) {
    const int n = dag.size();
    auto in_range = [n](NodeId v) { return v >= 0 && v < n; };
    if (!in_range(x) || !in_range(y) || x == y)
        throw InvalidNodes("d_separated: invalid endpoints");
    std::vector<std::uint8_t> in_z(static_cast<std::size_t>(n), 0);
    for (NodeId v : z) {
        if (!in_range(v) || v == x || v == y)
            throw InvalidNodes("d_separated: invalid conditioning node");
        in_z[static_cast<std::size_t>(v)] = 1;
    }

    // Ancestors of z, z included.
    std::vector<std::uint8_t> anc(in_z);
    std::vector<NodeId> stack(z.begin(), z.end());
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        for (NodeId p : dag.parents(v))
            if (!anc[static_cast<std::size_t>(p)]) {
                anc[static_cast<std::size_t>(p)] = 1;
                stack.push_back(p);
            }
    }

    // Visit (node, came_from_child). Leaving "up" goes to parents, "down" to children.
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(2 * n), 0);
    std::vector<std::pair<NodeId, bool>> frontier{{x, true}};
    seen[static_cast<std::size_t>(2 * x + 1)] = 1;
    while (!frontier.empty()) {
        const auto [v, from_child] = frontier.back();
        frontier.pop_back();
        const bool observed = in_z[static_cast<std::size_t>(v)] != 0;
        if (v == y && !observed)
            return false;
        auto push = [&](NodeId w, bool up) {
            auto& s = seen[static_cast<std::size_t>(2 * w + (up ? 1 : 0))];
            if (!s) {
                s = 1;
                frontier.emplace_back(w, up);
            }
        };
        if (from_child) {
            if (!observed) {
                for (NodeId p : dag.parents(v))
                    push(p, true);
                for (NodeId c : dag.children(v))
                    push(c, false);
            }
        } else {
            if (!observed)
                for (NodeId c : dag.children(v))
                    push(c, false);
            if (anc[static_cast<std::size_t>(v)])
                for (NodeId p : dag.parents(v))
                    push(p, true);
        }
    }
    return true;
}

Skeleton skeleton_of(const Dag& dag) { return Skeleton(dag.names(), dag.edges()); }

std::vector<UnshieldedTriple> unshielded_triples(const Skeleton& skel) {
    std::vector<UnshieldedTriple> out;
    for (NodeId t = 0; t < skel.size(); ++t) {
        const auto& nb = skel.neighbors(t);
        for (std::size_t i = 0; i < nb.size(); ++i)
            for (std::size_t j = i + 1; j < nb.size(); ++j)
                if (!skel.adjacent(nb[i], nb[j]))
                    out.push_back(UnshieldedTriple{nb[i], t, nb[j]});
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<UnshieldedTriple> v_structures_of(const Dag& dag) {
    std::vector<UnshieldedTriple> out;
    for (const auto& ut : unshielded_triples(skeleton_of(dag)))
        if (dag.has_edge(ut.x, ut.t) && dag.has_edge(ut.y, ut.t))
            out.push_back(ut);
    return out;
}

namespace {

/// Mutable mark matrix used while closing a Pdag.
class OrientationState {
public:
    explicit OrientationState(const Pdag& p) : n_(p.size()), marks_(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_)) {
        for (NodeId a = 0; a < n_; ++a)
            for (NodeId b = 0; b < n_; ++b)
                marks_[cell(n_, a, b)] = p.mark(a, b);
        neighbors_.resize(static_cast<std::size_t>(n_));
        for (NodeId a = 0; a < n_; ++a)
            for (NodeId b = 0; b < n_; ++b)
                if (marks_[cell(n_, a, b)] != EdgeMark::None)
                    neighbors_[static_cast<std::size_t>(a)].push_back(b);
    }

    EdgeMark mark(NodeId a, NodeId b) const { return marks_[cell(n_, a, b)]; }
    bool adj(NodeId a, NodeId b) const { return mark(a, b) != EdgeMark::None; }
    bool dir(NodeId a, NodeId b) const { return mark(a, b) == EdgeMark::Forward; }
    bool und(NodeId a, NodeId b) const { return mark(a, b) == EdgeMark::Undirected; }
    const std::vector<NodeId>& nb(NodeId a) const { return neighbors_[static_cast<std::size_t>(a)]; }

    void orient(NodeId a, NodeId b) {
        if (directed_path(b, a))
            throw OrientationConflict("orienting " + std::to_string(a) + "->" + std::to_string(b) + " closes a directed cycle");
        for (NodeId c : nb(b))
            if (c != a && dir(c, b) && !adj(c, a))
                throw OrientationConflict("orienting " + std::to_string(a) + "->" + std::to_string(b) +
                                          " creates a new collider with " + std::to_string(c));
        marks_[cell(n_, a, b)] = EdgeMark::Forward;
        marks_[cell(n_, b, a)] = EdgeMark::Backward;
    }

    Pdag to_pdag(const std::vector<std::string>& names) const {
        std::vector<Edge> directed, undirected;
        for (NodeId a = 0; a < n_; ++a)
            for (NodeId b = 0; b < n_; ++b) {
                if (dir(a, b))
                    directed.emplace_back(a, b);
                else if (a < b && und(a, b))
                    undirected.emplace_back(a, b);
            }
        return Pdag(names, std::move(directed), std::move(undirected));
    }

private:
    bool directed_path(NodeId from, NodeId to) const {
        std::vector<std::uint8_t> seen(static_cast<std::size_t>(n_), 0);
        std::vector<NodeId> stack{from};
        seen[static_cast<std::size_t>(from)] = 1;
        while (!stack.empty()) {
            const NodeId v = stack.back();
            stack.pop_back();
            if (v == to)
                return true;
            for (NodeId w : nb(v))
                if (dir(v, w) && !seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    stack.push_back(w);
                }
        }
        return false;
    }

    int n_;
    std::vector<EdgeMark> marks_;
    std::vector<std::vector<NodeId>> neighbors_;
};

// Each rule answers: given undirected a-b, is a->b forced?

bool meek_r1(const OrientationState& s, NodeId a, NodeId b) {
    for (NodeId c : s.nb(a))
        if (c != b && s.dir(c, a) && !s.adj(c, b))
            return true;
    return false;
}

bool meek_r2(const OrientationState& s, NodeId a, NodeId b) {
    for (NodeId c : s.nb(a))
        if (s.dir(a, c) && s.dir(c, b))
            return true;
    return false;
}

bool meek_r3(const OrientationState& s, NodeId a, NodeId b) {
    const auto& nb = s.nb(a);
    for (std::size_t i = 0; i < nb.size(); ++i) {
        const NodeId c = nb[i];
        if (c == b || !s.und(a, c) || !s.dir(c, b))
            continue;
        for (std::size_t j = i + 1; j < nb.size(); ++j) {
            const NodeId d = nb[j];
            if (d != b && s.und(a, d) && s.dir(d, b) && !s.adj(c, d))
                return true;
        }
    }
    return false;
}

bool meek_r4(const OrientationState& s, NodeId a, NodeId b) {
    for (NodeId d : s.nb(a)) {
        if (d == b || !s.dir(d, b))
            continue;
        for (NodeId c : s.nb(a))
            if (c != b && c != d && s.dir(c, d) && !s.adj(c, b))
                return true;
    }
    return false;
}

} // namespace

Pdag meek_closure(const Pdag& pdag) {
    OrientationState state(pdag);
    const int n = pdag.size();
    bool changed = true;
    while (changed) {
        changed = false;
        for (NodeId a = 0; a < n; ++a) {
            for (NodeId b : state.nb(a)) {
                if (!state.und(a, b))
                    continue;
                if (meek_r1(state, a, b) || meek_r2(state, a, b) || meek_r3(state, a, b) || meek_r4(state, a, b)) {
                    state.orient(a, b);
                    changed = true;
                }
            }
        }
    }
    return state.to_pdag(pdag.names());
}

Pdag cpdag_of(const Dag& dag) {
    const auto vs = v_structures_of(dag);
    std::vector<Edge> directed;
    for (const auto& v : vs) {
        directed.emplace_back(v.x, v.t);
        directed.emplace_back(v.y, v.t);
    }
    std::sort(directed.begin(), directed.end());
    directed.erase(std::unique(directed.begin(), directed.end()), directed.end());
    std::vector<Edge> undirected;
    for (const auto& [p, c] : dag.edges())
        if (!std::binary_search(directed.begin(), directed.end(), Edge{p, c}))
            undirected.emplace_back(std::min(p, c), std::max(p, c));
    return meek_closure(Pdag(dag.names(), std::move(directed), std::move(undirected)));
}

} // namespace ml4c
