#include "simclust/graph.hpp"

#include "simclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace simclust {
namespace {

// Maps global node ids onto positions in a sorted member list.
class LocalIndex {
 public:
  explicit LocalIndex(std::span<const int> members) : members_(members) {}

  std::size_t operator()(int node) const {
    auto it = std::lower_bound(members_.begin(), members_.end(), node);
    if (it == members_.end() || *it != node) {
      fail(ErrorKind::input, "edge endpoint " + std::to_string(node) +
                                 " is not a member of the node set");
    }
    return static_cast<std::size_t>(it - members_.begin());
  }

 private:
  std::span<const int> members_;
};

std::vector<int> sorted_unique(std::span<const int> members) {
  std::vector<int> out(members.begin(), members.end());
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    fail(ErrorKind::input, "member set contains duplicates");
  }
  return out;
}

void sort_by_endpoints(std::vector<WeightedEdge>& edges) {
  std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
}

}  // namespace

double EdgeSet::total() const {
  std::vector<WeightedEdge> ordered = edges;
  sort_by_endpoints(ordered);
  double sum = 0.0;
  for (const auto& e : ordered) sum += e.w;
  return sum;
}

UnionFind::UnionFind(std::size_t n) : parent_(n), rank_(n, 0), components_(n) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t UnionFind::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool UnionFind::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
  --components_;
  return true;
}

EdgeSet kruskal(std::span<const int> members, std::vector<WeightedEdge> candidates) {
  EdgeSet out;
  out.members = sorted_unique(members);
  const LocalIndex local(out.members);
  std::sort(candidates.begin(), candidates.end(), edge_less);
  UnionFind uf(out.members.size());
  const std::size_t want = out.members.empty() ? 0 : out.members.size() - 1;
  for (const auto& e : candidates) {
    if (out.edges.size() == want) break;
    if (uf.unite(local(e.i), local(e.j))) out.edges.push_back(e);
  }
  return out;
}

EdgeSet minimum_spanning_tree(std::span<const int> members, const WeightFn& weight) {
  const std::vector<int> nodes = sorted_unique(members);
  std::vector<WeightedEdge> candidates;
  candidates.reserve(nodes.size() * (nodes.size() - (nodes.empty() ? 0 : 1)) / 2);
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      const double w = weight(nodes[a], nodes[b]);
      if (!std::isfinite(w)) {
        fail(ErrorKind::input, "non-finite weight on edge (" + std::to_string(nodes[a]) +
                                   ", " + std::to_string(nodes[b]) + ")");
      }
      candidates.push_back({nodes[a], nodes[b], w});
    }
  }
  return kruskal(nodes, std::move(candidates));
}

EdgeSet mst_add_vertex(const EdgeSet& tree, int v, std::span<const WeightedEdge> star) {
  std::vector<int> members = tree.members;
  members.insert(std::upper_bound(members.begin(), members.end(), v), v);
  std::vector<WeightedEdge> candidates = tree.edges;
  candidates.insert(candidates.end(), star.begin(), star.end());
  return kruskal(members, std::move(candidates));
}

namespace {

template <typename PairWeight>
EdgeSet remove_vertex_impl(const EdgeSet& tree, int v, PairWeight&& pair_weight) {
  EdgeSet out;
  out.members.reserve(tree.members.size());
  for (int m : tree.members) {
    if (m != v) out.members.push_back(m);
  }
  if (out.members.size() == tree.members.size()) {
    fail(ErrorKind::input, "vertex " + std::to_string(v) + " is not a tree member");
  }
  for (const auto& e : tree.edges) {
    if (e.i != v && e.j != v) out.edges.push_back(e);
  }
  const std::size_t n = out.members.size();
  if (n <= 1 || out.edges.size() + 1 == n) {
    std::sort(out.edges.begin(), out.edges.end(), edge_less);
    return out;
  }

  const LocalIndex local(out.members);
  UnionFind uf(n);
  for (const auto& e : out.edges) uf.unite(local(e.i), local(e.j));

  // Dense component ids 0..D-1.
  std::vector<std::size_t> comp(n);
  std::vector<std::size_t> root_to_comp(n, n);
  std::vector<std::size_t> comp_size;
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t r = uf.find(a);
    if (root_to_comp[r] == n) {
      root_to_comp[r] = comp_size.size();
      comp_size.push_back(0);
    }
    comp[a] = root_to_comp[r];
    ++comp_size[comp[a]];
  }
  const std::size_t D = comp_size.size();
  const std::size_t largest = static_cast<std::size_t>(
      std::max_element(comp_size.begin(), comp_size.end()) - comp_size.begin());

  // Cheapest edge between every pair of components; every such pair has at
  // least one endpoint outside the largest component.
  std::vector<WeightedEdge> best(D * D);
  std::vector<bool> have(D * D, false);
  for (std::size_t a = 0; a < n; ++a) {
    if (comp[a] == largest) continue;
    pair_weight.begin_row(out.members[a]);
    for (std::size_t b = 0; b < n; ++b) {
      if (comp[b] == comp[a]) continue;
      // Pairs between two small components are seen from both sides.
      if (comp[b] != largest && b < a) continue;
      const int ga = out.members[a];
      const int gb = out.members[b];
      const WeightedEdge e = make_edge(ga, gb, pair_weight(ga, gb));
      const std::size_t lo = std::min(comp[a], comp[b]);
      const std::size_t hi = std::max(comp[a], comp[b]);
      const std::size_t slot = lo * D + hi;
      if (!have[slot] || edge_less(e, best[slot])) {
        best[slot] = e;
        have[slot] = true;
      }
    }
  }
  std::vector<WeightedEdge> cross;
  for (std::size_t s = 0; s < D * D; ++s) {
    if (have[s]) cross.push_back(best[s]);
  }
  std::sort(cross.begin(), cross.end(), edge_less);
  UnionFind cuf(D);
  for (const auto& e : cross) {
    if (cuf.unite(comp[local(e.i)], comp[local(e.j)])) out.edges.push_back(e);
    if (cuf.components() == 1) break;
  }
  std::sort(out.edges.begin(), out.edges.end(), edge_less);
  return out;
}

struct CallbackWeight {
  const WeightFn& fn;
  void begin_row(int) {}
  double operator()(int a, int b) const { return fn(a, b); }
};

struct RowWeight {
  const WeightRowFn& fn;
  std::vector<double> buffer;
  int current = -1;
  void begin_row(int a) {
    fn(a, buffer);
    current = a;
  }
  // Always called with a == current.
  double operator()(int, int b) const { return buffer[static_cast<std::size_t>(b)]; }
};

}  // namespace

EdgeSet mst_remove_vertex(const EdgeSet& tree, int v, const WeightFn& weight) {
  return remove_vertex_impl(tree, v, CallbackWeight{weight});
}

EdgeSet mst_remove_vertex(const EdgeSet& tree, int v, std::size_t num_nodes,
                          const WeightRowFn& row) {
  RowWeight rw{row, std::vector<double>(num_nodes), -1};
  return remove_vertex_impl(tree, v, rw);
}

bool is_connected(std::span<const int> members, std::span<const WeightedEdge> edges) {
  if (members.size() <= 1) return true;
  const std::vector<int> nodes = sorted_unique(members);
  const LocalIndex local(nodes);
  UnionFind uf(nodes.size());
  for (const auto& e : edges) uf.unite(local(e.i), local(e.j));
  return uf.components() == 1;
}

std::vector<int> split_heaviest(const EdgeSet& tree, int M) {
  const std::size_t n = tree.members.size();
  if (M < 1 || static_cast<std::size_t>(M) > n) {
    fail(ErrorKind::parameter, "cluster count must lie in [1, " + std::to_string(n) + "]");
  }
  if (!std::is_sorted(tree.members.begin(), tree.members.end())) {
    fail(ErrorKind::input, "tree members must be sorted");
  }
  if (tree.edges.size() + 1 != n || !is_connected(tree.members, tree.edges)) {
    fail(ErrorKind::input, "edge set is not a spanning tree of its members");
  }
  std::vector<WeightedEdge> edges = tree.edges;
  std::sort(edges.begin(), edges.end(), edge_less);
  edges.resize(edges.size() - static_cast<std::size_t>(M - 1));

  const LocalIndex local(tree.members);
  UnionFind uf(n);
  for (const auto& e : edges) uf.unite(local(e.i), local(e.j));

  // Members are sorted, so the first time a root is seen is its smallest node.
  std::vector<int> label_of_root(n, 0);
  std::vector<int> labels(n);
  int next = 1;
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t r = uf.find(a);
    if (label_of_root[r] == 0) label_of_root[r] = next++;
    labels[a] = label_of_root[r];
  }
  return labels;
}

}  // namespace simclust
