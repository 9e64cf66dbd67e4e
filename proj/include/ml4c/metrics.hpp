#pragma once

// CPDAG comparison metrics. Every unordered node pair falls into exactly
// one cell of a 3x4 truth/prediction table:
//
//   truth \ predicted | directed right | directed wrong | undirected | absent
//   directed          |      c1 ok     |       c2       |     c3     |   c4
//   undirected        |           c5                    |   c6 ok    |   c7
//   absent            |           c8                    |     c9     |  c10 ok
//
// SHD counts the non-ok cells, one per pair.

#include "ml4c/graph.hpp"

#include <array>
#include <cstdint>
#include <span>

namespace ml4c {

struct EdgeConfusion {
    /// cells[0] is c1, ..., cells[9] is c10.
    std::array<std::int64_t, 10> cells{};

    std::int64_t operator[](int cell_number) const { return cells[static_cast<std::size_t>(cell_number - 1)]; }
    std::int64_t& operator[](int cell_number) { return cells[static_cast<std::size_t>(cell_number - 1)]; }
    friend bool operator==(const EdgeConfusion&, const EdgeConfusion&) = default;
};

/// Throws NodeMismatch when node counts or names differ.
EdgeConfusion edge_confusion(const Pdag& truth, const Pdag& predicted);

std::int64_t shd(const EdgeConfusion& c);
std::int64_t shd(const Pdag& truth, const Pdag& predicted);

/// F1 over identifiable (directed) edges; 0 when the truth has none.
double edge_f1(const EdgeConfusion& c);
double edge_f1(const Pdag& truth, const Pdag& predicted);

/// Binary F1 with label 1 positive. No positives on either side gives 1.
/// Throws LengthMismatch.
double ut_f1(std::span<const int> truth_labels, std::span<const int> predicted_labels);

} // namespace ml4c
