#include "simclust/affinity.hpp"

#include "simclust/error.hpp"
#include "simclust/kernels.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace simclust {

void PointSet::validate() const {
  if (coords.rows() < 1) fail(ErrorKind::input, "point set is empty");
  for (Eigen::Index j = 0; j < coords.cols(); ++j) {
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
      if (!std::isfinite(coords(i, j))) {
        fail(ErrorKind::input, "non-finite coordinate at row " +
                                   std::to_string(i) + ", column " +
                                   std::to_string(j));
      }
    }
  }
  if (labels) {
    if (labels->size() != size()) {
      fail(ErrorKind::input, "label count does not match point count");
    }
    for (std::size_t i = 0; i < labels->size(); ++i) {
      if ((*labels)[i] < 1) {
        fail(ErrorKind::input, "truth label at row " + std::to_string(i) +
                                   " must be >= 1");
      }
    }
  }
}

DistanceMatrix DistanceMatrix::from_matrix(Eigen::MatrixXd values, double tol) {
  if (values.rows() != values.cols()) {
    fail(ErrorKind::input, "distance matrix must be square");
  }
  const Eigen::Index n = values.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (values(j, j) != 0.0) fail(ErrorKind::input, "distance matrix diagonal must be zero");
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = values(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        fail(ErrorKind::input, "distance entries must be finite and non-negative");
      }
      if (std::abs(v - values(j, i)) > tol) {
        fail(ErrorKind::input, "distance matrix is not symmetric");
      }
    }
  }
  // Exact symmetry keeps (i,j) and (j,i) lookups interchangeable.
  Eigen::MatrixXd sym = 0.5 * (values + values.transpose());
  return DistanceMatrix(std::move(sym));
}

DistanceMatrix distance_matrix(const PointSet& points) {
  points.validate();
  const std::size_t n = points.size();
  const std::size_t d = points.dims();

  std::vector<const double*> cols(d);
  for (std::size_t k = 0; k < d; ++k) {
    cols[k] = points.coords.col(static_cast<Eigen::Index>(k)).data();
  }
  const auto& kern = kernels::active();

  Eigen::MatrixXd out(n, n);
  std::vector<double> query(d);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < d; ++k) query[k] = cols[k][j];
    double* column = out.col(static_cast<Eigen::Index>(j)).data();
    kern.sq_dist_soa(cols.data(), d, n, query.data(), column);
    for (std::size_t i = 0; i < n; ++i) column[i] = std::sqrt(column[i]);
    column[j] = 0.0;
  }
  return DistanceMatrix(std::move(out));
}

AffinityMatrix kernel_affinity(const DistanceMatrix& distances, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    fail(ErrorKind::parameter, "gamma must be a positive finite number");
  }
  const std::size_t n = distances.size();
  const double inv_g2 = 1.0 / (gamma * gamma);
  AffinityMatrix out;
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double dij = distances(i, j);
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          i == j ? 0.0 : std::exp(-dij * dij * inv_g2);
    }
  }
  out.mode = Normalization::none;
  return out;
}

AffinityMatrix normalize(const AffinityMatrix& affinity, Normalization mode) {
  if (mode == Normalization::none) return affinity;
  const Eigen::VectorXd sums = affinity.values.rowwise().sum();
  for (Eigen::Index i = 0; i < sums.size(); ++i) {
    if (!(sums(i) > 0.0)) {
      fail(ErrorKind::degenerate,
           "row " + std::to_string(i) + " has zero affinity to every other point");
    }
  }
  AffinityMatrix out;
  out.mode = mode;
  if (mode == Normalization::row_stochastic) {
    out.values = sums.cwiseInverse().asDiagonal() * affinity.values;
  } else {
    const Eigen::VectorXd s = sums.cwiseSqrt().cwiseInverse();
    out.values = s.asDiagonal() * affinity.values * s.asDiagonal();
  }
  return out;
}

}  // namespace simclust
