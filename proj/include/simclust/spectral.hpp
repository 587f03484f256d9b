#pragma once

// Spectral-clustering baseline and the rank-t latent feature map.

#include "simclust/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace simclust {

/// Eigenpairs sorted by eigenvalue, descending. Each eigenvector has its
/// largest-magnitude component (first one on ties) made positive.
struct EigenSystem {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // column i pairs with values(i)
};

/// Top-t eigenpairs of a symmetric matrix. Throws Error(input) if the matrix
/// is not symmetric within 1e-9 and Error(parameter) unless 1 <= t <= N.
EigenSystem top_eigen(const Eigen::MatrixXd& A, int t);
EigenSystem top_eigen(const AffinityMatrix& A, int t);

/// Rows lambda_i of Lambda* = D^1/2 V^T (N x t). Eigenvalues in
/// [-1e-8, 0) are clipped to zero; anything lower throws Error(spectrum).
struct FeatureMap {
  Eigen::MatrixXd rows;
  Eigen::VectorXd eigenvalues;
  std::size_t clipped = 0;
};
FeatureMap latent_feature_map(const Eigen::MatrixXd& A, int t);

/// Squared Frobenius norm of A - rows * rows^T.
double reconstruction_error2(const Eigen::MatrixXd& A, const Eigen::MatrixXd& rows);

struct RowNormalized {
  Eigen::MatrixXd rows;
  std::size_t zero_rows = 0;
};
RowNormalized row_normalize(const Eigen::MatrixXd& rows);

struct KMeansResult {
  Labeling labels;          // 1-based
  Eigen::MatrixXd centers;  // M x t
  double distortion = 0.0;
  std::vector<double> history;  // distortion after each Lloyd iteration
  int iterations = 0;
};

/// k-means++ seeding then Lloyd iterations until the distortion changes by
/// less than 1e-10 or 300 iterations. An empty cluster takes the point
/// farthest from its center.
KMeansResult kmeans(const Eigen::MatrixXd& rows, int M, std::uint64_t seed);

enum class SpectralMode { njw, latent_feature };

struct SpectralOptions {
  int clusters = 2;
  std::optional<double> gamma;  // empty: search the grid
  SpectralMode mode = SpectralMode::njw;
  std::uint64_t seed = 0;
};

struct GammaTrial {
  double gamma = 0.0;
  double distortion = 0.0;
  bool usable = true;
  std::string note;
};

struct SpectralResult {
  Labeling labels;
  double gamma = 0.0;
  SpectralMode mode = SpectralMode::njw;
  double distortion = 0.0;      // k-means distortion on normalized rows at gamma
  Eigen::VectorXd eigenvalues;  // top M of the symmetric-normalized affinity
  std::size_t zero_rows = 0;
  std::vector<GammaTrial> grid;  // empty for a fixed gamma
};

/// gamma^2 = 2^p * median squared pairwise distance, p = -6..4.
std::vector<double> gamma_grid(const DistanceMatrix& D);

/// Kernel affinity, symmetric normalization, top-M eigenvectors, then
/// k-means on the row-normalized eigenvectors (njw) or on Lambda* rows
/// (latent_feature). The automatic gamma minimizes the normalized-row
/// distortion; ties go to the smaller gamma.
SpectralResult spectral_cluster(const PointSet& points, const SpectralOptions& options);

const char* to_string(SpectralMode mode);

}  // namespace simclust
