#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace simclust {

/// Undirected edge between global node indices, canonically i < j.
struct WeightedEdge {
  int i = 0;
  int j = 0;
  double w = 0.0;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

/// Strict total order used everywhere an MST is built: (w, i, j).
/// Under a strict order the minimum spanning tree is unique, which makes
/// incremental and from-scratch construction agree edge for edge.
inline bool edge_less(const WeightedEdge& a, const WeightedEdge& b) {
  if (a.w != b.w) return a.w < b.w;
  if (a.i != b.i) return a.i < b.i;
  return a.j < b.j;
}

inline WeightedEdge make_edge(int a, int b, double w) {
  return a < b ? WeightedEdge{a, b, w} : WeightedEdge{b, a, w};
}

/// Edges over a declared member set (sorted ascending).
struct EdgeSet {
  std::vector<int> members;
  std::vector<WeightedEdge> edges;

  /// Sum of weights, accumulated in (i, j) order so the result depends only
  /// on the set of edges, not on how it was built.
  double total() const;
};

using WeightFn = std::function<double(int, int)>;

class UnionFind {
 public:
  explicit UnionFind(std::size_t n);
  std::size_t find(std::size_t x);
  /// Returns false if a and b were already in the same set.
  bool unite(std::size_t a, std::size_t b);
  std::size_t components() const { return components_; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned char> rank_;
  std::size_t components_;
};

/// Kruskal over the complete graph on `members`. Throws Error(input) on a
/// non-finite weight.
EdgeSet minimum_spanning_tree(std::span<const int> members, const WeightFn& weight);

/// Kruskal over an explicit candidate edge list (edges must lie within
/// members). Returns a spanning forest if the candidates are disconnected.
EdgeSet kruskal(std::span<const int> members, std::vector<WeightedEdge> candidates);

/// Minimum spanning tree of tree.members + {v}, given every edge from v to
/// the existing members (`star`). Exact: the new tree only ever uses old tree
/// edges and star edges.
EdgeSet mst_add_vertex(const EdgeSet& tree, int v, std::span<const WeightedEdge> star);

/// Minimum spanning tree of tree.members - {v}. Surviving tree edges are kept;
/// the components left behind are reconnected by the cheapest cross edges,
/// scanning only pairs that touch a component other than the largest.
EdgeSet mst_remove_vertex(const EdgeSet& tree, int v, const WeightFn& weight);

/// Same as mst_remove_vertex, with weights supplied one row at a time:
/// row(a, out) fills out[b] = w(a, b) for every global node index b.
using WeightRowFn = std::function<void(int, std::span<double>)>;
EdgeSet mst_remove_vertex(const EdgeSet& tree, int v, std::size_t num_nodes,
                          const WeightRowFn& row);

bool is_connected(std::span<const int> members, std::span<const WeightedEdge> edges);

/// Cut the M-1 heaviest tree edges (ties: later in edge_less order is
/// heavier) and label components 1..M by their smallest node index.
/// The result is aligned with tree.members.
std::vector<int> split_heaviest(const EdgeSet& tree, int M);

}  // namespace simclust
