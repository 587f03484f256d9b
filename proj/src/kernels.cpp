#include "simclust/kernels.hpp"

#include <atomic>

namespace simclust::kernels {
namespace {

constexpr KernelTable kScalar{Isa::scalar, &scalar::sq_dist_soa,
                              &scalar::quadratic_hinge, &scalar::linear_hinge};
constexpr KernelTable kAvx2{Isa::avx2, &avx2::sq_dist_soa,
                            &avx2::quadratic_hinge, &avx2::linear_hinge};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* detect() { return cpu_has_avx2() ? &kAvx2 : &kScalar; }

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{detect()};
  return current;
}

}  // namespace

bool supported(Isa isa) {
  return isa == Isa::scalar || (isa == Isa::avx2 && cpu_has_avx2());
}

const KernelTable& table(Isa isa) { return isa == Isa::avx2 ? kAvx2 : kScalar; }

const KernelTable& active() { return *slot().load(std::memory_order_relaxed); }

void force(Isa isa) {
  slot().store(supported(isa) ? &table(isa) : &kScalar);
}

void reset() { slot().store(detect()); }

const char* name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace simclust::kernels
