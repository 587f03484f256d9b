#include "move_engine.hpp"

#include "simclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace simclust::detail {

MoveEngine::MoveEngine(const DistanceMatrix& L, LikelihoodModel model, PriorKind prior,
                       Labeling labels)
    : L_(L), model_(std::move(model)), prior_(prior), labels_(std::move(labels)),
      row_(L.size()) {
  validate_labels(labels_, L_.size(), model_.num_classes());
  members_.assign(static_cast<std::size_t>(model_.num_classes()), {});
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    members_[static_cast<std::size_t>(labels_[i] - 1)].push_back(static_cast<int>(i));
  }
  rebuild();
}

void MoveEngine::set_model(LikelihoodModel model) {
  model_ = std::move(model);
  rebuild();
}

void MoveEngine::rebuild() {
  const int M = model_.num_classes();
  coef_.clear();
  for (int c = 1; c <= M; ++c) coef_.push_back(weight_coefficients(c, model_));
  cost_.assign(static_cast<std::size_t>(M), 0.0);

  if (prior_.is_connected()) {
    trees_.assign(static_cast<std::size_t>(M), {});
    for (int c = 1; c <= M; ++c) {
      const auto& coef = coef_[static_cast<std::size_t>(c - 1)];
      auto& tree = trees_[static_cast<std::size_t>(c - 1)];
      tree = minimum_spanning_tree(members_[static_cast<std::size_t>(c - 1)], [&](int a, int b) {
        return coef(L_(static_cast<std::size_t>(a), static_cast<std::size_t>(b)));
      });
      cost_[static_cast<std::size_t>(c - 1)] = tree.total();
    }
    return;
  }

  const std::size_t n = L_.size();
  weights_.assign(static_cast<std::size_t>(M), Eigen::MatrixXd());
  nearest_.assign(n, {});
  for (int c = 1; c <= M; ++c) {
    auto& W = weights_[static_cast<std::size_t>(c - 1)];
    W.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      coef_[static_cast<std::size_t>(c - 1)].apply(
          L_.column(j), {W.col(static_cast<Eigen::Index>(j)).data(), n});
    }
    const auto& group = members_[static_cast<std::size_t>(c - 1)];
    if (!group.empty() && group.size() <= static_cast<std::size_t>(prior_.K)) {
      fail(ErrorKind::infeasible_prior,
           "class " + std::to_string(c) + " has " + std::to_string(group.size()) +
               " members; the K-neighbor prior needs more than K = " +
               std::to_string(prior_.K));
    }
    for (int p : group) refresh_neighbors(p);
    cost_[static_cast<std::size_t>(c - 1)] = class_cost(c);
  }
}

double MoveEngine::score() const {
  double total = 0.0;
  for (double c : cost_) total += c;
  return -total;
}

double MoveEngine::tie_epsilon() const { return 1e-12 * (1.0 + std::abs(score())); }

bool MoveEngine::try_move(int i) {
  if (model_.num_classes() == 1) return false;
  return prior_.is_connected() ? try_move_connected(i) : try_move_k_neighbor(i);
}

bool MoveEngine::try_move_connected(int i) {
  const int M = model_.num_classes();
  const int a = labels_[static_cast<std::size_t>(i)];
  const std::size_t ai = static_cast<std::size_t>(a - 1);
  const double eps = tie_epsilon();

  // Removing i saves at most the weight of its incident tree edges.
  double incident = 0.0;
  for (const auto& e : trees_[ai].edges) {
    if (e.i == i || e.j == i) incident += e.w;
  }

  std::vector<EdgeSet> grown(static_cast<std::size_t>(M));
  std::vector<double> added_cost(static_cast<std::size_t>(M),
                                 std::numeric_limits<double>::infinity());
  std::vector<WeightedEdge> star;
  double cheapest_addition = std::numeric_limits<double>::infinity();
  const auto column = L_.column(static_cast<std::size_t>(i));
  for (int m = 1; m <= M; ++m) {
    if (m == a) continue;
    const std::size_t mi = static_cast<std::size_t>(m - 1);
    coef_[mi].apply(column, row_);
    star.clear();
    for (int j : members_[mi]) star.push_back(make_edge(i, j, row_[static_cast<std::size_t>(j)]));
    grown[mi] = mst_add_vertex(trees_[mi], i, star);
    added_cost[mi] = grown[mi].total() - cost_[mi];
    cheapest_addition = std::min(cheapest_addition, added_cost[mi]);
  }
  if (incident - cheapest_addition <= eps) return false;

  const auto& coef_a = coef_[ai];
  EdgeSet shrunk = mst_remove_vertex(
      trees_[ai], i, L_.size(), [&](int node, std::span<double> out) {
        coef_a.apply(L_.column(static_cast<std::size_t>(node)), out);
      });
  const double shrunk_total = shrunk.total();
  const double saving = cost_[ai] - shrunk_total;

  int best = a;
  double best_gain = 0.0;
  for (int m = 1; m <= M; ++m) {
    if (m == a) continue;
    const double gain = saving - added_cost[static_cast<std::size_t>(m - 1)];
    if (gain > best_gain + eps) {
      best = m;
      best_gain = gain;
    }
  }
  if (best == a) return false;

  const std::size_t bi = static_cast<std::size_t>(best - 1);
  trees_[ai] = std::move(shrunk);
  cost_[ai] = shrunk_total;
  trees_[bi] = std::move(grown[bi]);
  cost_[bi] = trees_[bi].total();
  members_[ai] = trees_[ai].members;
  members_[bi] = trees_[bi].members;
  labels_[static_cast<std::size_t>(i)] = best;
  return true;
}

const Eigen::MatrixXd& MoveEngine::class_weights(int c) const {
  return weights_[static_cast<std::size_t>(c - 1)];
}

void MoveEngine::refresh_neighbors(int p) {
  const int c = labels_[static_cast<std::size_t>(p)];
  const auto& group = members_[static_cast<std::size_t>(c - 1)];
  const auto& W = class_weights(c);
  auto& list = nearest_[static_cast<std::size_t>(p)];
  list.clear();
  for (int j : group) {
    if (j != p) list.emplace_back(W(j, p), j);
  }
  const std::size_t keep = std::min(list.size(), static_cast<std::size_t>(prior_.K) + 1);
  std::partial_sort(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(keep), list.end());
  list.resize(keep);
}

double MoveEngine::point_cost(int p) const {
  const auto& list = nearest_[static_cast<std::size_t>(p)];
  const std::size_t K = std::min(list.size(), static_cast<std::size_t>(prior_.K));
  double total = 0.0;
  for (std::size_t t = 0; t < K; ++t) total += list[t].first;
  return total;
}

double MoveEngine::class_cost(int c) const {
  double total = 0.0;
  for (int p : members_[static_cast<std::size_t>(c - 1)]) total += point_cost(p);
  return total;
}

bool MoveEngine::try_move_k_neighbor(int i) {
  const int M = model_.num_classes();
  const int a = labels_[static_cast<std::size_t>(i)];
  const std::size_t ai = static_cast<std::size_t>(a - 1);
  const std::size_t K = static_cast<std::size_t>(prior_.K);
  const double eps = tie_epsilon();
  const auto key = [](double w, int j) { return std::pair<double, int>{w, j}; };

  // Leaving must not strand a class with 1..K members.
  if (members_[ai].size() - 1 <= K) return false;
  const auto& Wa = class_weights(a);
  double saving = point_cost(i);
  for (int p : members_[ai]) {
    if (p == i) continue;
    const auto& list = nearest_[static_cast<std::size_t>(p)];
    for (std::size_t t = 0; t < K; ++t) {
      if (list[t].second == i) {
        saving += list[t].first - list[K].first;
        break;
      }
    }
  }

  int best = a;
  double best_gain = 0.0;
  for (int m = 1; m <= M; ++m) {
    if (m == a) continue;
    const auto& group = members_[static_cast<std::size_t>(m - 1)];
    if (group.size() < K) continue;
    const auto& Wm = class_weights(m);
    double added = 0.0;
    for (int j : k_nearest_by_weight(i, group, {Wm.col(i).data(), L_.size()}, prior_.K, scratch_)) {
      added += Wm(j, i);
    }
    if (group.size() > K) {
      for (int p : group) {
        const auto& kth = nearest_[static_cast<std::size_t>(p)][K - 1];
        if (key(Wm(i, p), i) < kth) added += Wm(i, p) - kth.first;
      }
    }
    const double gain = saving - added;
    if (gain > best_gain + eps) {
      best = m;
      best_gain = gain;
    }
  }
  if (best == a) return false;
  (void)Wa;

  const std::size_t bi = static_cast<std::size_t>(best - 1);
  auto& from = members_[ai];
  from.erase(std::lower_bound(from.begin(), from.end(), i));
  auto& to = members_[bi];
  to.insert(std::upper_bound(to.begin(), to.end(), i), i);
  labels_[static_cast<std::size_t>(i)] = best;

  for (int p : from) {
    auto& list = nearest_[static_cast<std::size_t>(p)];
    const auto it = std::find_if(list.begin(), list.end(), [&](const auto& e) { return e.second == i; });
    if (it == list.end()) continue;
    list.erase(it);
    if (list.size() < std::min(from.size() - 1, K + 1)) refresh_neighbors(p);
  }
  const auto& Wb = class_weights(best);
  for (int p : to) {
    if (p == i) continue;
    auto& list = nearest_[static_cast<std::size_t>(p)];
    const auto entry = key(Wb(i, p), i);
    list.insert(std::upper_bound(list.begin(), list.end(), entry), entry);
    if (list.size() > K + 1) list.pop_back();
  }
  refresh_neighbors(i);
  cost_[ai] = class_cost(a);
  cost_[bi] = class_cost(best);
  return true;
}

NeighborGraph MoveEngine::graph() const {
  if (!prior_.is_connected()) return map_graph_given_labels(L_, labels_, model_, prior_);
  NeighborGraph nu;
  nu.directed = false;
  for (std::size_t c = 0; c < trees_.size(); ++c) {
    for (const auto& e : trees_[c].edges) {
      nu.edges.push_back({e.i, e.j, static_cast<int>(c + 1), e.w});
    }
  }
  std::sort(nu.edges.begin(), nu.edges.end(), [](const NeighborEdge& x, const NeighborEdge& y) {
    return x.i != y.i ? x.i < y.i : x.j < y.j;
  });
  return nu;
}

}  // namespace simclust::detail
