//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>

#include "tflow/kernels.h"

namespace tflow::kernels {
namespace {

double dot_scalar(const double *a, const double *b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double *x, double *y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    y[i] += alpha * x[i];
}

void gemv_scalar(const double *w, std::size_t rows, std::size_t cols,
                 const double *x, double *y) {
  for (std::size_t r = 0; r < rows; ++r)
    y[r] += dot_scalar(w + r * cols, x, cols);
}

void gemv_t_scalar(const double *w, std::size_t rows, std::size_t cols,
                   const double *x, double *y) {
  for (std::size_t r = 0; r < rows; ++r)
    axpy_scalar(x[r], w + r * cols, y, cols);
}

void ger_scalar(double alpha, const double *u, std::size_t rows,
                const double *v, std::size_t cols, double *w) {
  for (std::size_t r = 0; r < rows; ++r)
    axpy_scalar(alpha * u[r], v, w + r * cols, cols);
}

double sq_dist_scalar(const double *a, const double *b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void adam_scalar(double *param, const double *grad, double *m, double *v,
                 std::size_t n, const AdamCoeffs &c) {
  const double one_m_b1 = 1.0 - c.beta1;
  const double one_m_b2 = 1.0 - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_m_b1 * g;
    v[i] = c.beta2 * v[i] + one_m_b2 * (g * g);
    const double mhat = m[i] * c.bias1;
    const double vhat = v[i] * c.bias2;
    param[i] -= c.lr * (mhat / (std::sqrt(vhat) + c.eps));
  }
}

void and_or_popcount_scalar(const std::uint64_t *a, const std::uint64_t *b,
                            std::size_t n, std::uint64_t *and_count,
                            std::uint64_t *or_count) {
  std::uint64_t ac = 0, oc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ac += static_cast<std::uint64_t>(std::popcount(a[i] & b[i]));
    oc += static_cast<std::uint64_t>(std::popcount(a[i] | b[i]));
  }
  *and_count = ac;
  *or_count = oc;
}

}  // namespace

const KernelTable &scalar_table() {
  static const KernelTable table {
    "scalar",      dot_scalar,     axpy_scalar, gemv_scalar,
    gemv_t_scalar, ger_scalar,     sq_dist_scalar,
    adam_scalar,   and_or_popcount_scalar,
  };
  return table;
}

}  // namespace tflow::kernels
