// NEON kernel variants for aarch64, where NEON is baseline. Two float64x2
// registers emulate the 4-lane blocked accumulation order of the scalar
// reference: v01 carries lanes {0,1}, v23 carries lanes {2,3}.

#include "mixad/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace mixad::kernels {

namespace {

void add_neon_k(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_neon_k(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_neon_k(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_neon_k(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void scale_neon_k(double alpha, const double* x, double* out, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

void mul_acc_neon_k(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vfmaq_f64(vld1q_f64(out + i), vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = std::fma(a[i], b[i], out[i]);
}

double sum_neon_k(const double* x, std::size_t n) {
  float64x2_t v01 = vdupq_n_f64(0.0);
  float64x2_t v23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    v01 = vaddq_f64(v01, vld1q_f64(x + i));
    v23 = vaddq_f64(v23, vld1q_f64(x + i + 2));
  }
  double acc[4] = {vgetq_lane_f64(v01, 0), vgetq_lane_f64(v01, 1),
                   vgetq_lane_f64(v23, 0), vgetq_lane_f64(v23, 1)};
  for (std::size_t lane = 0; i < n; ++i, ++lane) acc[lane] += x[i];
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double dot_neon_k(const double* x, const double* y, std::size_t n) {
  float64x2_t v01 = vdupq_n_f64(0.0);
  float64x2_t v23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    v01 = vfmaq_f64(v01, vld1q_f64(x + i), vld1q_f64(y + i));
    v23 = vfmaq_f64(v23, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double acc[4] = {vgetq_lane_f64(v01, 0), vgetq_lane_f64(v01, 1),
                   vgetq_lane_f64(v23, 0), vgetq_lane_f64(v23, 1)};
  for (std::size_t lane = 0; i < n; ++i, ++lane) acc[lane] = std::fma(x[i], y[i], acc[lane]);
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

void matmul_acc_neon_k(const double* a, const double* b, double* c,
                       std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const float64x2_t av = vdupq_n_f64(arow[p]);
      const double* brow = b + p * n;
      std::size_t j = 0;
      for (; j + 2 <= n; j += 2)
        vst1q_f64(crow + j, vfmaq_f64(vld1q_f64(crow + j), av, vld1q_f64(brow + j)));
      for (; j < n; ++j) crow[j] = std::fma(arow[p], brow[j], crow[j]);
    }
  }
}

const KernelTable kNeon = {
    "neon",        add_neon_k,    sub_neon_k, mul_neon_k,
    axpy_neon_k,   scale_neon_k,  mul_acc_neon_k,
    sum_neon_k,    dot_neon_k,    matmul_acc_neon_k,
};

}  // namespace

const KernelTable* neon_table() { return &kNeon; }

}  // namespace mixad::kernels

#else

namespace mixad::kernels {
const KernelTable* neon_table() { return nullptr; }
}  // namespace mixad::kernels

#endif
