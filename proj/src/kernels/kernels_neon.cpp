//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tables.h"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace tflow::kernels::internal {
namespace {

double dot_neon(const double *a, const double *b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i)
    s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double *x, double *y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i)
    y[i] = std::fma(alpha, x[i], y[i]);
}

void gemv_neon(const double *w, std::size_t rows, std::size_t cols,
               const double *x, double *y) {
  for (std::size_t r = 0; r < rows; ++r)
    y[r] += dot_neon(w + r * cols, x, cols);
}

void gemv_t_neon(const double *w, std::size_t rows, std::size_t cols,
                 const double *x, double *y) {
  for (std::size_t r = 0; r < rows; ++r)
    axpy_neon(x[r], w + r * cols, y, cols);
}

void ger_neon(double alpha, const double *u, std::size_t rows, const double *v,
              std::size_t cols, double *w) {
  for (std::size_t r = 0; r < rows; ++r)
    axpy_neon(alpha * u[r], v, w + r * cols, cols);
}

double sq_dist_neon(const double *a, const double *b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void adam_neon(double *param, const double *grad, double *m, double *v,
               std::size_t n, const kernels::AdamCoeffs &c) {
  const float64x2_t b1 = vdupq_n_f64(c.beta1);
  const float64x2_t b2 = vdupq_n_f64(c.beta2);
  const float64x2_t omb1 = vdupq_n_f64(1.0 - c.beta1);
  const float64x2_t omb2 = vdupq_n_f64(1.0 - c.beta2);
  const float64x2_t bc1 = vdupq_n_f64(c.bias1);
  const float64x2_t bc2 = vdupq_n_f64(c.bias2);
  const float64x2_t lr = vdupq_n_f64(c.lr);
  const float64x2_t eps = vdupq_n_f64(c.eps);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t g = vld1q_f64(grad + i);
    float64x2_t vm = vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)),
                               vmulq_f64(omb1, g));
    float64x2_t vv = vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)),
                               vmulq_f64(omb2, vmulq_f64(g, g)));
    vst1q_f64(m + i, vm);
    vst1q_f64(v + i, vv);
    const float64x2_t mhat = vmulq_f64(vm, bc1);
    const float64x2_t vhat = vmulq_f64(vv, bc2);
    const float64x2_t step =
        vmulq_f64(lr, vdivq_f64(mhat, vaddq_f64(vsqrtq_f64(vhat), eps)));
    vst1q_f64(param + i, vsubq_f64(vld1q_f64(param + i), step));
  }
  const double one_m_b1 = 1.0 - c.beta1;
  const double one_m_b2 = 1.0 - c.beta2;
  for (; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_m_b1 * g;
    v[i] = c.beta2 * v[i] + one_m_b2 * (g * g);
    param[i] -= c.lr * ((m[i] * c.bias1) / (std::sqrt(v[i] * c.bias2) + c.eps));
  }
}

void and_or_popcount_neon(const std::uint64_t *a, const std::uint64_t *b,
                          std::size_t n, std::uint64_t *and_count,
                          std::uint64_t *or_count) {
  std::uint64_t ac = 0, oc = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint8x16_t va = vreinterpretq_u8_u64(vld1q_u64(a + i));
    const uint8x16_t vb = vreinterpretq_u8_u64(vld1q_u64(b + i));
    ac += vaddlvq_u8(vcntq_u8(vandq_u8(va, vb)));
    oc += vaddlvq_u8(vcntq_u8(vorrq_u8(va, vb)));
  }
  for (; i < n; ++i) {
    ac += static_cast<std::uint64_t>(std::popcount(a[i] & b[i]));
    oc += static_cast<std::uint64_t>(std::popcount(a[i] | b[i]));
  }
  *and_count = ac;
  *or_count = oc;
}

}  // namespace

const KernelTable *neon_table() {
  static const KernelTable table {
    "neon",      dot_neon,     axpy_neon, gemv_neon,
    gemv_t_neon, ger_neon,     sq_dist_neon,
    adam_neon,   and_or_popcount_neon,
  };
  return &table;
}

}  // namespace tflow::kernels::internal

#else

namespace tflow::kernels::internal {
const KernelTable *neon_table() {
  return nullptr;
}
}  // namespace tflow::kernels::internal

#endif
