// AArch64 only. NEON has no separate-rounding guarantee issue as long as
// vfmaq is avoided, so mul and add stay distinct.
#include <arm_neon.h>

#include <cmath>

#include "spatel/simd/kernels.hpp"

namespace spatel::simd {
namespace {

void axpy_drop(double* y, const double* x, double a, std::size_t n, double drop) {
  const float64x2_t va = vdupq_n_f64(a);
  const float64x2_t vdrop = vdupq_n_f64(drop);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i)));
    const uint64x2_t small = vcltq_f64(vabsq_f64(v), vdrop);
    vst1q_f64(y + i, vreinterpretq_f64_u64(vbicq_u64(vreinterpretq_u64_f64(v), small)));
  }
  for (; i < n; ++i) {
    const double v = y[i] + a * x[i];
    y[i] = std::fabs(v) < drop ? 0.0 : v;
  }
}

void scale(double* y, double a, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(vld1q_f64(y + i), va));
  for (; i < n; ++i) y[i] *= a;
}

Violation max_violation(const double* v, const double* lo, const double* hi, std::size_t n) {
  // The scan is branchy and memory bound; the scalar loop is already optimal here.
  return detail::kScalar.max_violation(v, lo, hi, n);
}

}  // namespace

namespace detail {
const Kernels kNeon{Isa::Neon, axpy_drop, scale, max_violation};
}

}  // namespace spatel::simd
