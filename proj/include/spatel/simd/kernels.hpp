#pragma once

#include <cstddef>

namespace spatel::simd {

enum class Isa { Scalar, Avx2, Neon };

const char* to_string(Isa isa);

/// Result of a bound-violation scan.
struct Violation {
  std::size_t index = 0;
  double amount = 0;  // max(lo - v, v - hi); non-positive means in bounds
};

/// Dense row kernels used by the simplex tableau. Every variant produces
/// bit-identical results to the scalar reference: no FMA, no reassociation.
struct Kernels {
  Isa isa = Isa::Scalar;

  /// y += a * x, then entries with |y| < drop become exactly zero.
  void (*axpy_drop)(double* y, const double* x, double a, std::size_t n, double drop) = nullptr;

  /// y *= a.
  void (*scale)(double* y, double a, std::size_t n) = nullptr;

  /// Largest bound violation; ties go to the lowest index. n must be > 0.
  Violation (*max_violation)(const double* v, const double* lo, const double* hi, std::size_t n) = nullptr;
};

bool available(Isa isa);

/// Kernels for a specific instruction set; throws std::invalid_argument when
/// the CPU or the build lacks it.
const Kernels& kernels_for(Isa isa);

/// Best available set, chosen once. SPATEL_SIMD=scalar|avx2|neon overrides.
const Kernels& kernels();

namespace detail {
extern const Kernels kScalar;
#if defined(SPATEL_HAVE_AVX2)
extern const Kernels kAvx2;
#endif
#if defined(SPATEL_HAVE_NEON)
extern const Kernels kNeon;
#endif
}  // namespace detail

}  // namespace spatel::simd
