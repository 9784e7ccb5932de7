#include "mixad/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace mixad::kernels {

namespace {

void add_scalar_k(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_scalar_k(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_scalar_k(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_scalar_k(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void scale_scalar_k(double alpha, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i];
}

void mul_acc_scalar_k(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::fma(a[i], b[i], out[i]);
}

// 4-lane blocked order: lane j accumulates indices congruent to j mod 4, the
// tail lands in the low lanes, and the final combine is (l0+l1)+(l2+l3).
// SIMD variants reproduce exactly this association.
double sum_scalar_k(const double* x, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += x[i];
    acc[1] += x[i + 1];
    acc[2] += x[i + 2];
    acc[3] += x[i + 3];
  }
  for (std::size_t lane = 0; i < n; ++i, ++lane) acc[lane] += x[i];
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double dot_scalar_k(const double* x, const double* y, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] = std::fma(x[i], y[i], acc[0]);
    acc[1] = std::fma(x[i + 1], y[i + 1], acc[1]);
    acc[2] = std::fma(x[i + 2], y[i + 2], acc[2]);
    acc[3] = std::fma(x[i + 3], y[i + 3], acc[3]);
  }
  for (std::size_t lane = 0; i < n; ++i, ++lane) acc[lane] = std::fma(x[i], y[i], acc[lane]);
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

// i-k-j loop with a broadcast A element; per output cell the accumulation is
// sequential in k, which the j-vectorized variants preserve lane by lane.
void matmul_acc_scalar_k(const double* a, const double* b, double* c,
                         std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] = std::fma(av, brow[j], crow[j]);
    }
  }
}

const KernelTable kScalar = {
    "scalar",        add_scalar_k,    sub_scalar_k, mul_scalar_k,
    axpy_scalar_k,   scale_scalar_k,  mul_acc_scalar_k,
    sum_scalar_k,    dot_scalar_k,    matmul_acc_scalar_k,
};

const KernelTable* pick_table() {
  const char* env = std::getenv("MIXAD_SIMD");
  const char* mode = env ? env : "auto";
  if (std::strcmp(mode, "scalar") == 0) return &kScalar;
  if (std::strcmp(mode, "avx2") == 0) {
    if (const KernelTable* t = avx2_table()) return t;
    std::fprintf(stderr, "mixad: MIXAD_SIMD=avx2 unavailable, using scalar kernels\n");
    return &kScalar;
  }
  if (std::strcmp(mode, "neon") == 0) {
    if (const KernelTable* t = neon_table()) return t;
    std::fprintf(stderr, "mixad: MIXAD_SIMD=neon unavailable, using scalar kernels\n");
    return &kScalar;
  }
  if (std::strcmp(mode, "auto") != 0) {
    std::fprintf(stderr, "mixad: unknown MIXAD_SIMD=%s, using scalar kernels\n", mode);
    return &kScalar;
  }
  if (const KernelTable* t = avx2_table()) return t;
  if (const KernelTable* t = neon_table()) return t;
  return &kScalar;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

const KernelTable& active() {
  static const KernelTable* table = pick_table();
  return *table;
}

}  // namespace mixad::kernels
