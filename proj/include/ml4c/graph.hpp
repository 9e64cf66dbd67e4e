#pragma once

// Directed, undirected and partially directed graphs over indexed nodes.
// Node identity is the index; names ride along as metadata for I/O.
// All graph types are immutable once constructed.

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ml4c {

using NodeId = int;
/// Sorted, duplicate-free list of node indices.
using NodeSet = std::vector<NodeId>;
/// (parent, child) for directed edges; (min, max) for undirected ones.
using Edge = std::pair<NodeId, NodeId>;

NodeSet make_node_set(std::vector<NodeId> nodes);
bool contains(const NodeSet& set, NodeId v);

/// Default names "X0", "X1", ...
std::vector<std::string> default_node_names(int n);

class Dag {
public:
    Dag() = default;
    /// Throws InvalidNodes on self-loops, duplicates or out-of-range ends and
    /// CycleDetected on a directed cycle.
    Dag(std::vector<std::string> names, std::vector<Edge> edges);
    Dag(int n, std::vector<Edge> edges) : Dag(default_node_names(n), std::move(edges)) {}

    int size() const noexcept { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    /// Sorted lexicographically.
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const NodeSet& parents(NodeId v) const { return parents_[static_cast<std::size_t>(v)]; }
    const NodeSet& children(NodeId v) const { return children_[static_cast<std::size_t>(v)]; }
    bool has_edge(NodeId from, NodeId to) const;
    /// Topological order computed at construction.
    const std::vector<NodeId>& order() const noexcept { return order_; }

    friend bool operator==(const Dag& a, const Dag& b) { return a.names_ == b.names_ && a.edges_ == b.edges_; }

private:
    std::vector<std::string> names_;
    std::vector<Edge> edges_;
    std::vector<NodeSet> parents_;
    std::vector<NodeSet> children_;
    std::vector<NodeId> order_;
};

class Skeleton {
public:
    Skeleton() = default;
    /// Edges may be given in either orientation; duplicates under swap are
    /// rejected, as are self-loops.
    Skeleton(std::vector<std::string> names, std::vector<Edge> edges);
    Skeleton(int n, std::vector<Edge> edges) : Skeleton(default_node_names(n), std::move(edges)) {}

    int size() const noexcept { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    /// Canonical (min, max), sorted.
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const NodeSet& neighbors(NodeId v) const { return neighbors_[static_cast<std::size_t>(v)]; }
    bool adjacent(NodeId a, NodeId b) const {
        return adjacency_[static_cast<std::size_t>(a) * names_.size() + static_cast<std::size_t>(b)] != 0;
    }

    friend bool operator==(const Skeleton& a, const Skeleton& b) {
        return a.names_ == b.names_ && a.edges_ == b.edges_;
    }

private:
    std::vector<std::string> names_;
    std::vector<Edge> edges_;
    std::vector<NodeSet> neighbors_;
    std::vector<std::uint8_t> adjacency_;
};

/// State of an unordered pair as seen from (a, b).
enum class EdgeMark : std::uint8_t { None, Undirected, Forward, Backward };

class Pdag {
public:
    Pdag() = default;
    /// Throws InvalidNodes if a pair appears twice (in either set, either
    /// orientation) or on self-loops; CycleDetected if the directed part has
    /// a cycle.
    Pdag(std::vector<std::string> names, std::vector<Edge> directed, std::vector<Edge> undirected);
    Pdag(int n, std::vector<Edge> directed, std::vector<Edge> undirected)
        : Pdag(default_node_names(n), std::move(directed), std::move(undirected)) {}

    /// Fully undirected Pdag over a skeleton.
    static Pdag from_skeleton(const Skeleton& skel);

    int size() const noexcept { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::vector<Edge>& directed_edges() const noexcept { return directed_; }
    const std::vector<Edge>& undirected_edges() const noexcept { return undirected_; }

    EdgeMark mark(NodeId a, NodeId b) const {
        return static_cast<EdgeMark>(marks_[static_cast<std::size_t>(a) * names_.size() + static_cast<std::size_t>(b)]);
    }
    bool adjacent(NodeId a, NodeId b) const { return mark(a, b) != EdgeMark::None; }
    bool has_directed(NodeId from, NodeId to) const { return mark(from, to) == EdgeMark::Forward; }
    bool has_undirected(NodeId a, NodeId b) const { return mark(a, b) == EdgeMark::Undirected; }

    Skeleton skeleton() const;

    friend bool operator==(const Pdag& a, const Pdag& b) {
        return a.names_ == b.names_ && a.directed_ == b.directed_ && a.undirected_ == b.undirected_;
    }

private:
    std::vector<std::string> names_;
    std::vector<Edge> directed_;
    std::vector<Edge> undirected_;
    std::vector<std::uint8_t> marks_;
};

/// Unshielded triple <x, t, y>, stored with x < y.
struct UnshieldedTriple {
    NodeId x = 0;
    NodeId t = 0;
    NodeId y = 0;

    static UnshieldedTriple make(NodeId a, NodeId center, NodeId b) {
        return a < b ? UnshieldedTriple{a, center, b} : UnshieldedTriple{b, center, a};
    }
    friend auto operator<=>(const UnshieldedTriple&, const UnshieldedTriple&) = default;
};

/// Parents precede children. Throws CycleDetected.
std::vector<NodeId> topological_order(int n, std::span<const Edge> edges);
std::vector<NodeId> topological_order(const Dag& dag);

/// Reachability ("Bayes ball") d-separation test. Throws InvalidNodes when
/// x == y, an index is out of range, or x / y is in z.
bool d_separated(const Dag& dag, NodeId x, NodeId y, std::span<const NodeId> z);

Skeleton skeleton_of(const Dag& dag);

/// Deduplicated, sorted by (x, t, y).
std::vector<UnshieldedTriple> unshielded_triples(const Skeleton& skel);

/// Sorted by (x, t, y).
std::vector<UnshieldedTriple> v_structures_of(const Dag& dag);

/// Meek rules R1-R4 applied to a fixpoint. Only undirected edges are ever
/// oriented. Throws OrientationConflict if an orientation would close a
/// directed cycle or create an unshielded collider that the input did not
/// already have.
Pdag meek_closure(const Pdag& pdag);

/// Skeleton plus v-structures, closed under the Meek rules.
Pdag cpdag_of(const Dag& dag);

} // namespace ml4c
