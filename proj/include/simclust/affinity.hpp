#pragma once

#include "simclust/types.hpp"

namespace simclust {

/// Euclidean distance between every pair of rows.
DistanceMatrix distance_matrix(const PointSet& points);

/// exp(-D_ij^2 / gamma^2) off the diagonal, 0 on it. Unnormalized.
AffinityMatrix kernel_affinity(const DistanceMatrix& distances, double gamma);

/// Row-stochastic (S^-1 A) or symmetric (S^-1/2 A S^-1/2) normalization,
/// S = diag(row sums). Throws Error(degenerate) naming the first row whose
/// sum is not strictly positive.
AffinityMatrix normalize(const AffinityMatrix& affinity, Normalization mode);

}  // namespace simclust
