//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Compiled with -mavx2 -mfma -ffp-contract=off; only reached after the
// runtime CPU check in dispatch.cpp succeeds.

#include "tables.h"

#if defined(TFLOW_HAVE_AVX2)

#include <immintrin.h>

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace tflow::kernels::internal {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double *a, const double *b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                           acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                           acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i)
    s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double *x, double *y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy));
  }
  for (; i < n; ++i)
    y[i] = std::fma(alpha, x[i], y[i]);
}

void gemv_avx2(const double *w, std::size_t rows, std::size_t cols,
               const double *x, double *y) {
  for (std::size_t r = 0; r < rows; ++r)
    y[r] += dot_avx2(w + r * cols, x, cols);
}

void gemv_t_avx2(const double *w, std::size_t rows, std::size_t cols,
                 const double *x, double *y) {
  for (std::size_t r = 0; r < rows; ++r)
    axpy_avx2(x[r], w + r * cols, y, cols);
}

void ger_avx2(double alpha, const double *u, std::size_t rows, const double *v,
              std::size_t cols, double *w) {
  for (std::size_t r = 0; r < rows; ++r)
    axpy_avx2(alpha * u[r], v, w + r * cols, cols);
}

double sq_dist_avx2(const double *a, const double *b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Unfused on purpose: matches the scalar reference bit for bit.
void adam_avx2(double *param, const double *grad, double *m, double *v,
               std::size_t n, const kernels::AdamCoeffs &c) {
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d omb1 = _mm256_set1_pd(1.0 - c.beta1);
  const __m256d omb2 = _mm256_set1_pd(1.0 - c.beta2);
  const __m256d bc1 = _mm256_set1_pd(c.bias1);
  const __m256d bc2 = _mm256_set1_pd(c.bias2);
  const __m256d lr = _mm256_set1_pd(c.lr);
  const __m256d eps = _mm256_set1_pd(c.eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    __m256d vm = _mm256_loadu_pd(m + i);
    __m256d vv = _mm256_loadu_pd(v + i);
    vm = _mm256_add_pd(_mm256_mul_pd(b1, vm), _mm256_mul_pd(omb1, g));
    vv = _mm256_add_pd(_mm256_mul_pd(b2, vv),
                       _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, vm);
    _mm256_storeu_pd(v + i, vv);
    const __m256d mhat = _mm256_mul_pd(vm, bc1);
    const __m256d vhat = _mm256_mul_pd(vv, bc2);
    const __m256d step = _mm256_mul_pd(
        lr, _mm256_div_pd(mhat, _mm256_add_pd(_mm256_sqrt_pd(vhat), eps)));
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  const double one_m_b1 = 1.0 - c.beta1;
  const double one_m_b2 = 1.0 - c.beta2;
  for (; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_m_b1 * g;
    v[i] = c.beta2 * v[i] + one_m_b2 * (g * g);
    const double mhat = m[i] * c.bias1;
    const double vhat = v[i] * c.bias2;
    param[i] -= c.lr * (mhat / (std::sqrt(vhat) + c.eps));
  }
}

// Nibble-lookup popcount (Mula et al.), 4 words per iteration.
inline __m256i popcount_bytes(__m256i x) {
  const __m256i lookup =
      _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1,
                       2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(x, low_mask);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(x, 4), low_mask);
  return _mm256_add_epi8(_mm256_shuffle_epi8(lookup, lo),
                         _mm256_shuffle_epi8(lookup, hi));
}

void and_or_popcount_avx2(const std::uint64_t *a, const std::uint64_t *b,
                          std::size_t n, std::uint64_t *and_count,
                          std::uint64_t *or_count) {
  __m256i acc_and = _mm256_setzero_si256();
  __m256i acc_or = _mm256_setzero_si256();
  const __m256i zero = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i va =
        _mm256_loadu_si256(reinterpret_cast<const __m256i *>(a + i));
    const __m256i vb =
        _mm256_loadu_si256(reinterpret_cast<const __m256i *>(b + i));
    acc_and = _mm256_add_epi64(
        acc_and, _mm256_sad_epu8(popcount_bytes(_mm256_and_si256(va, vb)),
                                 zero));
    acc_or = _mm256_add_epi64(
        acc_or,
        _mm256_sad_epu8(popcount_bytes(_mm256_or_si256(va, vb)), zero));
  }
  alignas(32) std::uint64_t lanes_and[4];
  alignas(32) std::uint64_t lanes_or[4];
  _mm256_store_si256(reinterpret_cast<__m256i *>(lanes_and), acc_and);
  _mm256_store_si256(reinterpret_cast<__m256i *>(lanes_or), acc_or);
  std::uint64_t ac = lanes_and[0] + lanes_and[1] + lanes_and[2] + lanes_and[3];
  std::uint64_t oc = lanes_or[0] + lanes_or[1] + lanes_or[2] + lanes_or[3];
  for (; i < n; ++i) {
    ac += static_cast<std::uint64_t>(std::popcount(a[i] & b[i]));
    oc += static_cast<std::uint64_t>(std::popcount(a[i] | b[i]));
  }
  *and_count = ac;
  *or_count = oc;
}

}  // namespace

const KernelTable *avx2_table() {
  static const KernelTable table {
    "avx2",      dot_avx2,     axpy_avx2, gemv_avx2,
    gemv_t_avx2, ger_avx2,     sq_dist_avx2,
    adam_avx2,   and_or_popcount_avx2,
  };
  return &table;
}

}  // namespace tflow::kernels::internal

#else

namespace tflow::kernels::internal {
const KernelTable *avx2_table() {
  return nullptr;
}
}  // namespace tflow::kernels::internal

#endif
