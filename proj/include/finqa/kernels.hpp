#pragma once

#include <cstddef>
#include <string_view>

namespace finqa::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

/// Dot product of two dense vectors. Every implementation accumulates in four
/// interleaved lanes and reduces them as (l0 + l1) + (l2 + l3), so results are
/// identical across implementations.
using DotFn = double (*)(const double* a, const double* b, std::size_t n);

double dot_scalar(const double* a, const double* b, std::size_t n);
#if defined(__x86_64__) || defined(__i386__)
double dot_avx2(const double* a, const double* b, std::size_t n);
#endif

bool supported(Isa isa);

/// Best supported kernel, unless FINQA_KERNEL=scalar forces the fallback.
Isa preferred_isa();

DotFn dot_for(Isa isa);

}  // namespace finqa::kernels
