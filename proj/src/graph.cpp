#include "gtab/graph.hpp"

#include <algorithm>
#include <string>

#include "gtab/error.hpp"

namespace gtab {

Graph::Graph(std::vector<std::size_t> row_offsets, std::vector<NodeId> col_indices)
    : row_offsets_(std::move(row_offsets)), col_indices_(std::move(col_indices)) {
  if (row_offsets_.empty() || row_offsets_.front() != 0 ||
      row_offsets_.back() != col_indices_.size()) {
    throw InputError("graph: row offsets must start at 0 and end at the number of entries");
  }
  const std::size_t n = n_nodes();
  for (std::size_t v = 0; v < n; ++v) {
    if (row_offsets_[v] > row_offsets_[v + 1]) {
      throw InputError("graph: row offsets must be non-decreasing");
    }
    auto nb = neighbors(static_cast<NodeId>(v));
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] >= n) throw InputError("graph: neighbor index out of range");
      if (nb[k] == v) throw InputError("graph: self-loop at node " + std::to_string(v));
      if (k > 0 && nb[k] <= nb[k - 1]) {
        throw InputError("graph: neighbor list of node " + std::to_string(v) +
                         " is not strictly ascending");
      }
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    for (NodeId u : neighbors(static_cast<NodeId>(v))) {
      auto back = neighbors(u);
      if (!std::binary_search(back.begin(), back.end(), static_cast<NodeId>(v))) {
        throw InputError("graph: edge (" + std::to_string(v) + "," + std::to_string(u) +
                         ") has no reverse");
      }
    }
  }
}

Graph Graph::from_edges(std::size_t n_nodes, std::span<const Edge> edges,
                        std::size_t* self_loops_dropped) {
  std::vector<std::size_t> degree(n_nodes + 1, 0);
  std::size_t loops = 0;
  for (const Edge& e : edges) {
    if (e.src >= n_nodes || e.dst >= n_nodes) {
      throw InputError("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                       ") references a node outside [0, " + std::to_string(n_nodes) + ")");
    }
    if (e.src == e.dst) {
      ++loops;
      continue;
    }
    ++degree[e.src + 1];
    ++degree[e.dst + 1];
  }
  if (self_loops_dropped) *self_loops_dropped = loops;

  std::vector<std::size_t> offsets(degree);
  for (std::size_t v = 0; v < n_nodes; ++v) offsets[v + 1] += offsets[v];
  std::vector<NodeId> cols(offsets.back());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const Edge& e : edges) {
    if (e.src == e.dst) continue;
    cols[cursor[e.src]++] = e.dst;
    cols[cursor[e.dst]++] = e.src;
  }

  // Sort and deduplicate each row, compacting in place.
  std::vector<std::size_t> out_offsets(n_nodes + 1, 0);
  std::size_t write = 0;
  for (std::size_t v = 0; v < n_nodes; ++v) {
    auto first = cols.begin() + static_cast<std::ptrdiff_t>(offsets[v]);
    auto last = cols.begin() + static_cast<std::ptrdiff_t>(offsets[v + 1]);
    std::sort(first, last);
    last = std::unique(first, last);
    for (auto it = first; it != last; ++it) cols[write++] = *it;
    out_offsets[v + 1] = write;
  }
  cols.resize(write);
  Graph g;
  g.row_offsets_ = std::move(out_offsets);
  g.col_indices_ = std::move(cols);
  return g;
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(n_edges());
  for (std::size_t v = 0; v < n_nodes(); ++v) {
    for (NodeId u : neighbors(static_cast<NodeId>(v))) {
      if (v < u) out.push_back({static_cast<NodeId>(v), u});
    }
  }
  return out;
}

Graph Graph::permuted(std::span<const NodeId> new_id) const {
  validate_permutation(new_id, n_nodes());
  std::vector<Edge> edges = edge_list();
  for (Edge& e : edges) {
    e.src = new_id[e.src];
    e.dst = new_id[e.dst];
  }
  return from_edges(n_nodes(), edges);
}

std::vector<std::size_t> Graph::connected_components(std::size_t* count) const {
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(n_nodes(), kUnset);
  std::vector<NodeId> stack;
  std::size_t next = 0;
  for (std::size_t s = 0; s < n_nodes(); ++s) {
    if (label[s] != kUnset) continue;
    label[s] = next;
    stack.push_back(static_cast<NodeId>(s));
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      for (NodeId u : neighbors(v)) {
        if (label[u] == kUnset) {
          label[u] = next;
          stack.push_back(u);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

void validate_permutation(std::span<const NodeId> p, std::size_t n) {
  if (p.size() != n) throw InputError("permutation has wrong length");
  std::vector<bool> seen(n, false);
  for (NodeId x : p) {
    if (x >= n || seen[x]) throw InputError("not a permutation");
    seen[x] = true;
  }
}

std::vector<NodeId> invert_permutation(std::span<const NodeId> p) {
  std::vector<NodeId> inv(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) inv[p[i]] = static_cast<NodeId>(i);
  return inv;
}

}  // namespace gtab
