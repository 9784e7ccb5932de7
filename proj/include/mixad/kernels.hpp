#pragma once

#include <cstddef>

namespace mixad::kernels {

// Dense f64 inner loops behind the tensor layer. Every kernel has a scalar
// reference implementation; SIMD variants (AVX2 on x86-64, NEON on aarch64)
// are selected once at process start and must be bit-identical to the
// reference, which tests/test_kernels.cpp enforces. To make that hold,
// reductions use a fixed 4-lane blocked accumulation order and multiply-adds
// are fused (std::fma in the reference, vfmadd in the variants).
//
// Transcendentals (sigmoid/tanh/exp/log) are not in the table: they live in
// the op layer as plain libm loops shared by every dispatch choice.
struct KernelTable {
  const char* name;

  // out[i] = a[i] <op> b[i]
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);

  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[i] = alpha * x[i]
  void (*scale)(double alpha, const double* x, double* out, std::size_t n);
  // out[i] += a[i] * b[i]
  void (*mul_acc)(const double* a, const double* b, double* out, std::size_t n);

  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);

  // C (m x n) += A (m x k) * B (k x n), all row-major.
  void (*matmul_acc)(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n);
};

const KernelTable& scalar_table();

// nullptr when the CPU (or build) does not support the variant.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// Table picked at first use: MIXAD_SIMD={auto,scalar,avx2,neon} overrides
// detection; unknown or unavailable choices fall back to scalar with a
// warning on stderr.
const KernelTable& active();

}  // namespace mixad::kernels
