#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace simclust {

/// Class labels, one per point, 1-based (0 is reserved for "background").
using Labeling = std::vector<int>;

/// N points in d dimensions. Stored column-major, so each coordinate axis
/// is contiguous across points (the layout the distance kernels want).
struct PointSet {
  Eigen::MatrixXd coords;                 // N x d
  std::optional<std::vector<int>> labels; // truth labels, 1-based

  std::size_t size() const { return static_cast<std::size_t>(coords.rows()); }
  std::size_t dims() const { return static_cast<std::size_t>(coords.cols()); }

  /// Throws Error(input) unless N >= 1, coordinates are finite and the
  /// truth labels (if any) are positive and one per row.
  void validate() const;
};

/// Pairwise Euclidean distances: symmetric, zero diagonal, non-negative.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;

  /// Validates the invariants and throws Error(input) on violation.
  static DistanceMatrix from_matrix(Eigen::MatrixXd values, double tol = 1e-9);

  std::size_t size() const { return static_cast<std::size_t>(values_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  /// Distances from point j to every point (column j == row j).
  std::span<const double> column(std::size_t j) const {
    return {values_.col(static_cast<Eigen::Index>(j)).data(), size()};
  }
  const Eigen::MatrixXd& matrix() const { return values_; }

 private:
  friend DistanceMatrix distance_matrix(const PointSet& points);
  explicit DistanceMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {}
  Eigen::MatrixXd values_;
};

enum class Normalization { none, row_stochastic, symmetric };

struct AffinityMatrix {
  Eigen::MatrixXd values;
  Normalization mode = Normalization::none;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

}  // namespace simclust
