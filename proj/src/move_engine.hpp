#pragma once

// Internal: incremental state for coordinate moves on the latent-graph model.

#include "simclust/latent_graph.hpp"

#include <Eigen/Dense>

#include <span>
#include <utility>
#include <vector>

namespace simclust {

/// K cheapest out-neighbors of i among candidates (excluding i), ordered by
/// (weight, index). weights is indexed by global node.
std::vector<int> k_nearest_by_weight(int i, std::span<const int> candidates,
                                     std::span<const double> weights, int K,
                                     std::vector<std::pair<double, int>>& scratch);

/// Hard-EM class updates without the background recalibration.
LikelihoodModel update_class_params(const DistanceMatrix& L, const NeighborGraph& nu,
                                    LikelihoodModel model, double floor);

namespace detail {

class MoveEngine {
 public:
  MoveEngine(const DistanceMatrix& L, LikelihoodModel model, PriorKind prior,
             Labeling labels);

  /// Applies the best reassignment of point i; returns true if it moved.
  bool try_move(int i);

  /// Re-infers the MAP graph for every class under new parameters.
  void set_model(LikelihoodModel model);

  double score() const;
  const Labeling& labels() const { return labels_; }
  const LikelihoodModel& model() const { return model_; }
  NeighborGraph graph() const;

 private:
  void rebuild();
  bool try_move_connected(int i);
  bool try_move_k_neighbor(int i);
  const Eigen::MatrixXd& class_weights(int c) const;
  void refresh_neighbors(int p);
  double point_cost(int p) const;
  double class_cost(int c) const;
  double tie_epsilon() const;

  const DistanceMatrix& L_;
  LikelihoodModel model_;
  PriorKind prior_;
  Labeling labels_;
  std::vector<WeightCoefficients> coef_;
  std::vector<std::vector<int>> members_;  // sorted, per class
  std::vector<double> cost_;               // summed edge weight per class
  std::vector<EdgeSet> trees_;             // connected prior
  // K-neighbor prior: per-class weight matrices, and for every point its
  // K+1 cheapest classmates in (weight, index) order.
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<std::vector<std::pair<double, int>>> nearest_;
  std::vector<double> row_;
  std::vector<std::pair<double, int>> scratch_;
};

}  // namespace detail
}  // namespace simclust
