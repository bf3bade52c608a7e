#include "finqa/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

namespace finqa::kernels {

// mul then add, never fused, to stay bit-identical with dot_scalar
__attribute__((target("avx2"))) double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, prod);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (int k = 0; i < n; ++i, ++k) lane[k] += a[i] * b[i];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace finqa::kernels
#endif
