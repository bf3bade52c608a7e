#include <cstdlib>
#include <cstring>

#include "finqa/kernels.hpp"

namespace finqa::kernels {

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int k = 0; k < 4; ++k) lane[k] += a[i + k] * b[i + k];
  for (int k = 0; i < n; ++i, ++k) lane[k] += a[i] * b[i];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(__i386__)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa preferred_isa() {
  const char* forced = std::getenv("FINQA_KERNEL");
  if (forced && std::strcmp(forced, "scalar") == 0) return Isa::Scalar;
  return supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

DotFn dot_for(Isa isa) {
#if defined(__x86_64__) || defined(__i386__)
  if (isa == Isa::Avx2 && supported(Isa::Avx2)) return dot_avx2;
#else
  (void)isa;
#endif
  return dot_scalar;
}

}  // namespace finqa::kernels
