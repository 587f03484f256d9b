#include "simclust/kernels.hpp"

namespace simclust::kernels::scalar {

void sq_dist_soa(const double* const* cols, std::size_t dims, std::size_t n,
                 const double* query, double* out) {
  sq_dist_soa_tail(cols, dims, 0, n, query, out);
}

void sq_dist_soa_tail(const double* const* cols, std::size_t dims,
                      std::size_t begin, std::size_t end, const double* query,
                      double* out) {
  for (std::size_t j = begin; j < end; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dims; ++k) {
      const double d = cols[k][j] - query[k];
      acc = acc + d * d;
    }
    out[j] = acc;
  }
}

void quadratic_hinge(const double* x, std::size_t n, double center,
                     double scale, double offset, double* out) {
  for (std::size_t j = 0; j < n; ++j) {
    const double d = x[j] - center;
    const double w = d * d * scale + offset;
    out[j] = w > 0.0 ? w : 0.0;
  }
}

void linear_hinge(const double* x, std::size_t n, double slope, double offset,
                  double* out) {
  for (std::size_t j = 0; j < n; ++j) {
    const double w = x[j] * slope + offset;
    out[j] = w > 0.0 ? w : 0.0;
  }
}

}  // namespace simclust::kernels::scalar
