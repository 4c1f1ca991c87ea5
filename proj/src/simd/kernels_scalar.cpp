#include <cmath>

#include "spatel/simd/kernels.hpp"

namespace spatel::simd {
namespace {

void axpy_drop(double* y, const double* x, double a, std::size_t n, double drop) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = y[i] + a * x[i];
    y[i] = std::fabs(v) < drop ? 0.0 : v;
  }
}

void scale(double* y, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= a;
}

Violation max_violation(const double* v, const double* lo, const double* hi, std::size_t n) {
  Violation best{0, lo[0] - v[0]};
  if (v[0] - hi[0] > best.amount) best.amount = v[0] - hi[0];
  for (std::size_t i = 1; i < n; ++i) {
    double amt = lo[i] - v[i];
    const double up = v[i] - hi[i];
    if (up > amt) amt = up;
    if (amt > best.amount) best = {i, amt};
  }
  return best;
}

}  // namespace

namespace detail {
const Kernels kScalar{Isa::Scalar, axpy_drop, scale, max_violation};
}

}  // namespace spatel::simd
