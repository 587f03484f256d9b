#pragma once

// Brute-force references for small instances. None of these share code with
// the inference path beyond the likelihood and scoring definitions.

#include "simclust/graph.hpp"
#include "simclust/latent_graph.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace simclust::oracle {

/// Minimum-weight edge subset connecting `members`, by exhaustive search over
/// all 2^(n(n-1)/2) subsets. Ties: fewest edges, then lexicographically
/// smallest (i, j) sequence. Throws Error(size) above 5 members.
EdgeSet best_connected_subgraph(std::span<const int> members, const WeightFn& weight);

struct OracleResult {
  Labeling labels;
  NeighborGraph graph;
  double score = 0.0;
  std::size_t states = 0;  // labelings examined
};

/// Global MAP labeling by enumerating all M^N labelings (one per partition
/// when every class has the same parameters), each scored with its optimal
/// graph. Ties: fewer graph edges, then lexicographic order.
/// Throws Error(size) above 8 points.
OracleResult enumerate_map(const DistanceMatrix& L, int M, const LikelihoodModel& model,
                           const PriorKind& prior);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotation, descending.
std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd A);

/// sqrt of the sum of squared discarded eigenvalues, sqrt(sum_{i>t} l_i^2).
double rank_error_reference(const Eigen::MatrixXd& A, int t);

}  // namespace simclust::oracle
