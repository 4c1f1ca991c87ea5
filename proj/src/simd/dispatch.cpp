#include <cstdlib>
#include <stdexcept>
#include <string>

#include "spatel/simd/kernels.hpp"

namespace spatel::simd {

const char* to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "?";
}

bool available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(SPATEL_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(SPATEL_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Kernels& kernels_for(Isa isa) {
  if (!available(isa)) throw std::invalid_argument(std::string("instruction set not available: ") + to_string(isa));
  switch (isa) {
#if defined(SPATEL_HAVE_AVX2)
    case Isa::Avx2: return detail::kAvx2;
#endif
#if defined(SPATEL_HAVE_NEON)
    case Isa::Neon: return detail::kNeon;
#endif
    default: return detail::kScalar;
  }
}

namespace {

const Kernels& choose() {
  if (const char* env = std::getenv("SPATEL_SIMD")) {
    const std::string want = env;
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon})
      if (want == to_string(isa)) return kernels_for(isa);
    if (want != "auto") throw std::invalid_argument("SPATEL_SIMD must be scalar, avx2, neon or auto");
  }
  if (available(Isa::Avx2)) return kernels_for(Isa::Avx2);
  if (available(Isa::Neon)) return kernels_for(Isa::Neon);
  return detail::kScalar;
}

}  // namespace

const Kernels& kernels() {
  static const Kernels& k = choose();
  return k;
}

}  // namespace spatel::simd
