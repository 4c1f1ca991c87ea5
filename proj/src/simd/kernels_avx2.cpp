// Built with -mavx2 only; never reached unless the CPU reports AVX2.
#include <immintrin.h>

#include <cmath>

#include "spatel/simd/kernels.hpp"

namespace spatel::simd {
namespace {

void axpy_drop(double* y, const double* x, double a, std::size_t n, double drop) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vdrop = _mm256_set1_pd(drop);
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // Separate mul and add: matches the scalar rounding exactly.
    const __m256d v = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    const __m256d small = _mm256_cmp_pd(_mm256_andnot_pd(sign, v), vdrop, _CMP_LT_OQ);
    _mm256_storeu_pd(y + i, _mm256_andnot_pd(small, v));
  }
  for (; i < n; ++i) {
    const double v = y[i] + a * x[i];
    y[i] = std::fabs(v) < drop ? 0.0 : v;
  }
}

void scale(double* y, double a, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(y + i), va));
  for (; i < n; ++i) y[i] *= a;
}

Violation max_violation(const double* v, const double* lo, const double* hi, std::size_t n) {
  std::size_t i = 0;
  Violation best{0, -INFINITY};
  if (n >= 4) {
    __m256d bval = _mm256_set1_pd(-INFINITY);
    __m256d bidx = _mm256_set1_pd(-1.0);
    __m256d idx = _mm256_setr_pd(0, 1, 2, 3);
    const __m256d four = _mm256_set1_pd(4.0);
    for (; i + 4 <= n; i += 4) {
      const __m256d x = _mm256_loadu_pd(v + i);
      const __m256d down = _mm256_sub_pd(_mm256_loadu_pd(lo + i), x);
      const __m256d up = _mm256_sub_pd(x, _mm256_loadu_pd(hi + i));
      // Pick up where up > down, as the scalar code does.
      const __m256d amt = _mm256_blendv_pd(down, up, _mm256_cmp_pd(up, down, _CMP_GT_OQ));
      const __m256d gt = _mm256_cmp_pd(amt, bval, _CMP_GT_OQ);
      bval = _mm256_blendv_pd(bval, amt, gt);
      bidx = _mm256_blendv_pd(bidx, idx, gt);
      idx = _mm256_add_pd(idx, four);
    }
    alignas(32) double vals[4];
    alignas(32) double ids[4];
    _mm256_store_pd(vals, bval);
    _mm256_store_pd(ids, bidx);
    for (int l = 0; l < 4; ++l) {
      if (ids[l] < 0) continue;
      const auto li = static_cast<std::size_t>(ids[l]);
      if (vals[l] > best.amount || (vals[l] == best.amount && li < best.index)) best = {li, vals[l]};
    }
  }
  for (; i < n; ++i) {
    double amt = lo[i] - v[i];
    const double up = v[i] - hi[i];
    if (up > amt) amt = up;
    if (amt > best.amount) best = {i, amt};
  }
  return best;
}

}  // namespace

namespace detail {
const Kernels kAvx2{Isa::Avx2, axpy_drop, scale, max_violation};
}

}  // namespace spatel::simd
