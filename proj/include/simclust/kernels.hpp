#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference and an AVX2
// variant; the variant evaluates the same IEEE operations in the same order
// per lane (no FMA), so both produce bit-identical output. The active table
// is chosen once from CPUID and may be overridden for testing.

#include <cstddef>
#include <span>

namespace simclust::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  /// out[j] = sum_k (cols[k][j] - query[k])^2 for j < n.
  void (*sq_dist_soa)(const double* const* cols, std::size_t dims,
                      std::size_t n, const double* query, double* out);
  /// out[j] = max(0, (x[j] - center)^2 * scale + offset).
  void (*quadratic_hinge)(const double* x, std::size_t n, double center,
                          double scale, double offset, double* out);
  /// out[j] = max(0, x[j] * slope + offset).
  void (*linear_hinge)(const double* x, std::size_t n, double slope,
                       double offset, double* out);
};

bool supported(Isa isa);
const KernelTable& table(Isa isa);

/// Best supported table unless overridden by force().
const KernelTable& active();
void force(Isa isa);
void reset();

const char* name(Isa isa);

namespace scalar {
void sq_dist_soa(const double* const* cols, std::size_t dims, std::size_t n,
                 const double* query, double* out);
/// Same as sq_dist_soa restricted to columns [begin, end).
void sq_dist_soa_tail(const double* const* cols, std::size_t dims,
                      std::size_t begin, std::size_t end, const double* query,
                      double* out);
void quadratic_hinge(const double* x, std::size_t n, double center,
                     double scale, double offset, double* out);
void linear_hinge(const double* x, std::size_t n, double slope, double offset,
                  double* out);
}  // namespace scalar

namespace avx2 {
void sq_dist_soa(const double* const* cols, std::size_t dims, std::size_t n,
                 const double* query, double* out);
void quadratic_hinge(const double* x, std::size_t n, double center,
                     double scale, double offset, double* out);
void linear_hinge(const double* x, std::size_t n, double slope, double offset,
                  double* out);
}  // namespace avx2

// span conveniences over the active table
inline void quadratic_hinge(std::span<const double> x, double center,
                            double scale, double offset, std::span<double> out) {
  active().quadratic_hinge(x.data(), x.size(), center, scale, offset, out.data());
}
inline void linear_hinge(std::span<const double> x, double slope, double offset,
                         std::span<double> out) {
  active().linear_hinge(x.data(), x.size(), slope, offset, out.data());
}

}  // namespace simclust::kernels
