#include "simclust/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define SIMCLUST_HAVE_AVX2_PATH 1
#define SIMCLUST_TARGET_AVX2 __attribute__((target("avx2")))
#else
#define SIMCLUST_HAVE_AVX2_PATH 0
#endif

namespace simclust::kernels::avx2 {

#if SIMCLUST_HAVE_AVX2_PATH

// _mm256_max_pd(a, b) returns a only when a > b, matching the scalar
// `w > 0 ? w : 0` for NaN and signed zero.

SIMCLUST_TARGET_AVX2
void sq_dist_soa(const double* const* cols, std::size_t dims, std::size_t n,
                 const double* query, double* out) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < dims; ++k) {
      const __m256d d =
          _mm256_sub_pd(_mm256_loadu_pd(cols[k] + j), _mm256_set1_pd(query[k]));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    _mm256_storeu_pd(out + j, acc);
  }
  if (j < n) scalar::sq_dist_soa_tail(cols, dims, j, n, query, out);
}

SIMCLUST_TARGET_AVX2
void quadratic_hinge(const double* x, std::size_t n, double center,
                     double scale, double offset, double* out) {
  const __m256d vc = _mm256_set1_pd(center);
  const __m256d vs = _mm256_set1_pd(scale);
  const __m256d vo = _mm256_set1_pd(offset);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + j), vc);
    const __m256d w = _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(d, d), vs), vo);
    _mm256_storeu_pd(out + j, _mm256_max_pd(w, zero));
  }
  if (j < n) scalar::quadratic_hinge(x + j, n - j, center, scale, offset, out + j);
}

SIMCLUST_TARGET_AVX2
void linear_hinge(const double* x, std::size_t n, double slope, double offset,
                  double* out) {
  const __m256d vs = _mm256_set1_pd(slope);
  const __m256d vo = _mm256_set1_pd(offset);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d w = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(x + j), vs), vo);
    _mm256_storeu_pd(out + j, _mm256_max_pd(w, zero));
  }
  if (j < n) scalar::linear_hinge(x + j, n - j, slope, offset, out + j);
}

#else

void sq_dist_soa(const double* const* cols, std::size_t dims, std::size_t n,
                 const double* query, double* out) {
  scalar::sq_dist_soa(cols, dims, n, query, out);
}
void quadratic_hinge(const double* x, std::size_t n, double center,
                     double scale, double offset, double* out) {
  scalar::quadratic_hinge(x, n, center, scale, offset, out);
}
void linear_hinge(const double* x, std::size_t n, double slope, double offset,
                  double* out) {
  scalar::linear_hinge(x, n, slope, offset, out);
}

#endif

}  // namespace simclust::kernels::avx2
