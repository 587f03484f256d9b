#include "simclust/spectral.hpp"

#include "simclust/affinity.hpp"
#include "simclust/error.hpp"
#include "simclust/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace simclust {
namespace {

constexpr double kSymmetryTol = 1e-9;
constexpr double kNegativeTol = 1e-8;

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index arg = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
  }
  if (v(arg) < 0.0) v = -v;
}

double squared_distance(const Eigen::MatrixXd& rows, Eigen::Index r, const Eigen::MatrixXd& centers,
                        Eigen::Index c) {
  return (rows.row(r) - centers.row(c)).squaredNorm();
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

const char* to_string(SpectralMode mode) {
  return mode == SpectralMode::njw ? "njw" : "latent-feature";
}

EigenSystem top_eigen(const Eigen::MatrixXd& A, int t) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || n == 0) fail(ErrorKind::input, "eigensolve needs a non-empty square matrix");
  if (t < 1 || t > n) fail(ErrorKind::parameter, "retained dimension t must lie in 1..N");
  const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= kSymmetryTol)) {
    fail(ErrorKind::input,
         "matrix is not symmetric (max asymmetry " + std::to_string(asym) +
             "); use the symmetric normalization");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A);
  if (solver.info() != Eigen::Success) fail(ErrorKind::spectrum, "eigensolver did not converge");
  EigenSystem out;
  out.values.resize(t);
  out.vectors.resize(n, t);
  for (int k = 0; k < t; ++k) {
    const Eigen::Index src = n - 1 - k;
    out.values(k) = solver.eigenvalues()(src);
    out.vectors.col(k) = solver.eigenvectors().col(src);
    fix_sign(out.vectors.col(k));
  }
  return out;
}

EigenSystem top_eigen(const AffinityMatrix& A, int t) { return top_eigen(A.values, t); }

FeatureMap latent_feature_map(const Eigen::MatrixXd& A, int t) {
  const EigenSystem eig = top_eigen(A, t);
  FeatureMap out;
  out.eigenvalues = eig.values;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    if (eig.values(k) < -kNegativeTol) {
      fail(ErrorKind::spectrum, "retained eigenvalue " + std::to_string(eig.values(k)) +
                                     " is negative");
    }
    if (eig.values(k) < 0.0) {
      out.eigenvalues(k) = 0.0;
      ++out.clipped;
    }
  }
  out.rows = eig.vectors * out.eigenvalues.cwiseSqrt().asDiagonal();
  return out;
}

double reconstruction_error2(const Eigen::MatrixXd& A, const Eigen::MatrixXd& rows) {
  return (A - rows * rows.transpose()).squaredNorm();
}

RowNormalized row_normalize(const Eigen::MatrixXd& rows) {
  RowNormalized out;
  out.rows = rows;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double norm = rows.row(i).norm();
    if (norm > 0.0) {
      out.rows.row(i) /= norm;
    } else {
      out.rows.row(i).setZero();
      ++out.zero_rows;
    }
  }
  return out;
}

KMeansResult kmeans(const Eigen::MatrixXd& rows, int M, std::uint64_t seed) {
  const Eigen::Index n = rows.rows();
  if (M < 1) fail(ErrorKind::parameter, "k-means needs at least one cluster");
  if (M > n) fail(ErrorKind::parameter, "k-means needs M <= N");
  Rng rng(seed);

  Eigen::MatrixXd centers(M, rows.cols());
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  Eigen::Index first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
  centers.row(0) = rows.row(first);
  for (int c = 1; c < M; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], squared_distance(rows, i, centers, c - 1));
      total += d2[static_cast<std::size_t>(i)];
    }
    Eigen::Index pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (acc > target && d2[static_cast<std::size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.row(c) = rows.row(pick);
  }

  KMeansResult out;
  out.labels.assign(static_cast<std::size_t>(n), 1);
  std::vector<double> cost(static_cast<std::size_t>(n));
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= 300; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(rows, i, centers, 0);
      for (int c = 1; c < M; ++c) {
        const double d = squared_distance(rows, i, centers, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      out.labels[static_cast<std::size_t>(i)] = best + 1;
      cost[static_cast<std::size_t>(i)] = best_d;
    }
    std::vector<int> counts(static_cast<std::size_t>(M), 0);
    for (int c : out.labels) ++counts[static_cast<std::size_t>(c - 1)];
    for (int c = 0; c < M; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(i)] - 1)] < 2) continue;
        if (far < 0 || cost[static_cast<std::size_t>(i)] > cost[static_cast<std::size_t>(far)]) far = i;
      }
      --counts[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(far)] - 1)];
      out.labels[static_cast<std::size_t>(far)] = c + 1;
      cost[static_cast<std::size_t>(far)] = 0.0;
      counts[static_cast<std::size_t>(c)] = 1;
    }
    centers.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      centers.row(out.labels[static_cast<std::size_t>(i)] - 1) += rows.row(i);
    }
    for (int c = 0; c < M; ++c) centers.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

    double distortion = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      distortion += squared_distance(rows, i, centers, out.labels[static_cast<std::size_t>(i)] - 1);
    }
    out.history.push_back(distortion);
    out.iterations = it;
    out.distortion = distortion;
    if (std::abs(previous - distortion) < 1e-10) break;
    previous = distortion;
  }
  out.centers = std::move(centers);
  return out;
}

std::vector<double> gamma_grid(const DistanceMatrix& D) {
  std::vector<double> sq;
  const std::size_t n = D.size();
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) sq.push_back(D(i, j) * D(i, j));
  }
  const double m = sq.empty() ? 1.0 : median(std::move(sq));
  std::vector<double> out;
  for (int p = -6; p <= 4; ++p) out.push_back(std::sqrt(std::ldexp(m, p)));
  return out;
}

namespace {

struct Trial {
  KMeansResult normalized;
  Labeling labels;
  Eigen::VectorXd eigenvalues;
  std::size_t zero_rows = 0;
};

Trial run_gamma(const DistanceMatrix& D, double gamma, const SpectralOptions& options) {
  const AffinityMatrix A = normalize(kernel_affinity(D, gamma), Normalization::symmetric);
  const EigenSystem eig = top_eigen(A, options.clusters);
  Trial t;
  t.eigenvalues = eig.values;
  const RowNormalized rn = row_normalize(eig.vectors);
  t.zero_rows = rn.zero_rows;
  t.normalized = kmeans(rn.rows, options.clusters, options.seed);
  if (options.mode == SpectralMode::njw) {
    t.labels = t.normalized.labels;
  } else {
    const FeatureMap fm = latent_feature_map(A.values, options.clusters);
    t.labels = kmeans(fm.rows, options.clusters, options.seed).labels;
  }
  return t;
}

}  // namespace

SpectralResult spectral_cluster(const PointSet& points, const SpectralOptions& options) {
  points.validate();
  if (options.clusters < 1 || static_cast<std::size_t>(options.clusters) > points.size()) {
    fail(ErrorKind::parameter, "cluster count must lie in 1..N");
  }
  const DistanceMatrix D = distance_matrix(points);
  SpectralResult out;
  out.mode = options.mode;

  if (options.gamma) {
    const Trial t = run_gamma(D, *options.gamma, options);
    out.labels = t.labels;
    out.gamma = *options.gamma;
    out.distortion = t.normalized.distortion;
    out.eigenvalues = t.eigenvalues;
    out.zero_rows = t.zero_rows;
    return out;
  }

  bool found = false;
  Trial best;
  for (double gamma : gamma_grid(D)) {
    GammaTrial g;
    g.gamma = gamma;
    try {
      Trial t = run_gamma(D, gamma, options);
      g.distortion = t.normalized.distortion;
      if (!found || g.distortion < out.distortion) {
        found = true;
        out.gamma = gamma;
        out.distortion = g.distortion;
        best = std::move(t);
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::degenerate && e.kind() != ErrorKind::spectrum) throw;
      g.usable = false;
      g.distortion = std::numeric_limits<double>::quiet_NaN();
      g.note = e.what();
    }
    out.grid.push_back(std::move(g));
  }
  if (!found) fail(ErrorKind::degenerate, "no gamma on the grid gave a usable affinity");
  out.labels = std::move(best.labels);
  out.eigenvalues = std::move(best.eigenvalues);
  out.zero_rows = best.zero_rows;
  return out;
}

}  // namespace simclust
