#include "simclust/latent_graph.hpp"

#include "move_engine.hpp"
#include "simclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace simclust {
namespace {

std::vector<std::vector<int>> members_by_class(const Labeling& C, int M) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(M));
  for (std::size_t i = 0; i < C.size(); ++i) {
    out[static_cast<std::size_t>(C[i] - 1)].push_back(static_cast<int>(i));
  }
  return out;
}

void sort_edges(std::vector<NeighborEdge>& edges) {
  std::sort(edges.begin(), edges.end(), [](const NeighborEdge& a, const NeighborEdge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
}

}  // namespace

void validate_labels(const Labeling& C, std::size_t N, int M) {
  if (C.size() != N) {
    fail(ErrorKind::parameter, "labeling has " + std::to_string(C.size()) +
                                   " entries for " + std::to_string(N) + " points");
  }
  for (std::size_t i = 0; i < C.size(); ++i) {
    if (C[i] < 1 || C[i] > M) {
      fail(ErrorKind::parameter, "label of point " + std::to_string(i) +
                                     " is outside 1.." + std::to_string(M));
    }
  }
}

std::vector<int> k_nearest_by_weight(int i, std::span<const int> candidates,
                                     std::span<const double> weights, int K,
                                     std::vector<std::pair<double, int>>& scratch) {
  scratch.clear();
  for (int j : candidates) {
    if (j != i) scratch.emplace_back(weights[static_cast<std::size_t>(j)], j);
  }
  const auto k = static_cast<std::ptrdiff_t>(K);
  std::partial_sort(scratch.begin(), scratch.begin() + k, scratch.end());
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(K));
  for (std::ptrdiff_t t = 0; t < k; ++t) out.push_back(scratch[static_cast<std::size_t>(t)].second);
  return out;
}

NeighborGraph map_graph_given_labels(const DistanceMatrix& L, const Labeling& C,
                                     const LikelihoodModel& model,
                                     const PriorKind& prior) {
  const int M = model.num_classes();
  validate_labels(C, L.size(), M);
  const auto members = members_by_class(C, M);

  NeighborGraph nu;
  nu.directed = !prior.is_connected();
  for (int c = 1; c <= M; ++c) {
    const auto& group = members[static_cast<std::size_t>(c - 1)];
    if (group.empty()) continue;
    const WeightCoefficients coef = weight_coefficients(c, model);
    if (prior.is_connected()) {
      const EdgeSet tree = minimum_spanning_tree(
          group, [&](int a, int b) { return coef(L(static_cast<std::size_t>(a), static_cast<std::size_t>(b))); });
      for (const auto& e : tree.edges) nu.edges.push_back({e.i, e.j, c, e.w});
    } else {
      if (group.size() <= static_cast<std::size_t>(prior.K)) {
        fail(ErrorKind::infeasible_prior,
             "class " + std::to_string(c) + " has " + std::to_string(group.size()) +
                 " members; the K-neighbor prior needs more than K = " +
                 std::to_string(prior.K));
      }
      std::vector<double> row(L.size());
      std::vector<std::pair<double, int>> scratch;
      for (int i : group) {
        coef.apply(L.column(static_cast<std::size_t>(i)), row);
        for (int j : k_nearest_by_weight(i, group, row, prior.K, scratch)) {
          nu.edges.push_back({i, j, c, row[static_cast<std::size_t>(j)]});
        }
      }
    }
  }
  sort_edges(nu.edges);
  return nu;
}

double log_joint(const DistanceMatrix& L, const Labeling& C, const NeighborGraph& nu,
                 const LikelihoodModel& model) {
  const int M = model.num_classes();
  validate_labels(C, L.size(), M);
  std::vector<WeightCoefficients> coef;
  coef.reserve(static_cast<std::size_t>(M));
  for (int c = 1; c <= M; ++c) coef.push_back(weight_coefficients(c, model));

  double sum = 0.0;
  const int N = static_cast<int>(L.size());
  for (const auto& e : nu.edges) {
    if (e.i < 0 || e.j < 0 || e.i >= N || e.j >= N || e.i == e.j) {
      fail(ErrorKind::invariant, "graph edge has invalid endpoints");
    }
    if (e.cls < 1 || e.cls > M || C[static_cast<std::size_t>(e.i)] != e.cls ||
        C[static_cast<std::size_t>(e.j)] != e.cls) {
      fail(ErrorKind::invariant, "edge (" + std::to_string(e.i) + ", " +
                                     std::to_string(e.j) + ") has class " +
                                     std::to_string(e.cls) +
                                     " inconsistent with the labeling");
    }
    sum += coef[static_cast<std::size_t>(e.cls - 1)](
        L(static_cast<std::size_t>(e.i), static_cast<std::size_t>(e.j)));
  }
  return -sum;
}

bool is_admissible(const Labeling& C, const NeighborGraph& nu, const PriorKind& prior) {
  int M = 0;
  for (int c : C) M = std::max(M, c);
  for (const auto& e : nu.edges) {
    if (e.cls < 1 || e.i < 0 || e.j < 0 || static_cast<std::size_t>(e.i) >= C.size() ||
        static_cast<std::size_t>(e.j) >= C.size() || C[static_cast<std::size_t>(e.i)] != e.cls ||
        C[static_cast<std::size_t>(e.j)] != e.cls) {
      return false;
    }
  }
  const auto members = members_by_class(C, M);
  if (prior.is_connected()) {
    for (int c = 1; c <= M; ++c) {
      std::vector<WeightedEdge> edges;
      for (const auto& e : nu.edges) {
        if (e.cls == c) edges.push_back(make_edge(e.i, e.j, e.w));
      }
      if (!is_connected(members[static_cast<std::size_t>(c - 1)], edges)) return false;
    }
    return true;
  }
  std::vector<int> out_degree(C.size(), 0);
  for (const auto& e : nu.edges) ++out_degree[static_cast<std::size_t>(e.i)];
  return std::all_of(out_degree.begin(), out_degree.end(),
                     [&](int d) { return d == prior.K; });
}

MoveState best_move(const DistanceMatrix& L, const MoveState& state, int i,
                    const LikelihoodModel& model, const PriorKind& prior) {
  validate_labels(state.labels, L.size(), model.num_classes());
  if (i < 0 || static_cast<std::size_t>(i) >= L.size()) {
    fail(ErrorKind::parameter, "point index out of range");
  }
  detail::MoveEngine engine(L, model, prior, state.labels);
  engine.try_move(i);
  return {engine.labels(), engine.graph(), engine.score()};
}

LikelihoodModel update_class_params(const DistanceMatrix& L, const NeighborGraph& nu,
                                    LikelihoodModel model, double floor) {
  const int M = model.num_classes();
  std::vector<std::vector<double>> samples(static_cast<std::size_t>(M));
  for (const auto& e : nu.edges) {
    if (e.cls < 1 || e.cls > M) fail(ErrorKind::invariant, "edge class out of range");
    samples[static_cast<std::size_t>(e.cls - 1)].push_back(
        L(static_cast<std::size_t>(e.i), static_cast<std::size_t>(e.j)));
  }
  const double rate_ceiling = 1.0 / std::sqrt(floor);
  for (int c = 1; c <= M; ++c) {
    const auto& xs = samples[static_cast<std::size_t>(c - 1)];
    if (xs.empty()) continue;
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double count = static_cast<double>(xs.size());
    ClassParams& p = model.cls(c);
    if (model.kind == LikelihoodKind::gaussian) {
      const double mean = sum / count;
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      p.beta = mean;
      p.sigma2 = std::max(floor, ss / count);
    } else {
      p.beta = sum > 0.0 ? std::min(count / sum, rate_ceiling) : rate_ceiling;
    }
  }
  model.background.floor = floor;
  return model;
}

LikelihoodModel update_params(const DistanceMatrix& L, const Labeling& C,
                              const NeighborGraph& nu, const LikelihoodModel& model,
                              double floor) {
  if (!(floor > 0.0)) fail(ErrorKind::parameter, "variance floor must be positive");
  validate_labels(C, L.size(), model.num_classes());
  for (const auto& e : nu.edges) {
    if (C[static_cast<std::size_t>(e.i)] != e.cls || C[static_cast<std::size_t>(e.j)] != e.cls) {
      fail(ErrorKind::invariant, "graph is inconsistent with the labeling");
    }
  }
  return calibrate_background(L, update_class_params(L, nu, model, floor));
}

}  // namespace simclust
