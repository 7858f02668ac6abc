#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gtab/types.hpp"

namespace gtab {

struct Edge {
  NodeId src;
  NodeId dst;
};

/// Immutable undirected graph in compressed sparse row form.
///
/// Each undirected edge is stored in both directions, neighbor lists are
/// sorted ascending, and there are no self-loops or duplicates.
class Graph {
 public:
  Graph() : row_offsets_{0} {}

  /// Validates the CSR arrays. Throws InputError on any invariant violation.
  Graph(std::vector<std::size_t> row_offsets, std::vector<NodeId> col_indices);

  /// Builds a graph from an arbitrary edge list over `n_nodes` nodes. Edges
  /// are symmetrized and deduplicated; self-loops are dropped and counted in
  /// `self_loops_dropped` when given.
  static Graph from_edges(std::size_t n_nodes, std::span<const Edge> edges,
                          std::size_t* self_loops_dropped = nullptr);

  std::size_t n_nodes() const { return row_offsets_.size() - 1; }
  /// Number of undirected edges.
  std::size_t n_edges() const { return col_indices_.size() / 2; }

  std::size_t degree(NodeId v) const { return row_offsets_[v + 1] - row_offsets_[v]; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {col_indices_.data() + row_offsets_[v], degree(v)};
  }

  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<NodeId>& col_indices() const { return col_indices_; }

  /// Each undirected edge once, as (u, v) with u < v, in CSR order.
  std::vector<Edge> edge_list() const;

  /// Relabels nodes: old node i becomes node new_id[i].
  Graph permuted(std::span<const NodeId> new_id) const;

  /// Component label per node (labels are 0..count-1 in order of the smallest
  /// node of each component).
  std::vector<std::size_t> connected_components(std::size_t* count = nullptr) const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::size_t> row_offsets_;
  std::vector<NodeId> col_indices_;
};

/// Checks that `p` is a permutation of 0..n-1. Throws InputError otherwise.
void validate_permutation(std::span<const NodeId> p, std::size_t n);

/// Inverse of a permutation.
std::vector<NodeId> invert_permutation(std::span<const NodeId> p);

}  // namespace gtab
