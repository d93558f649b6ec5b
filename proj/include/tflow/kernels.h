//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_KERNELS_H_
#define TFLOW_KERNELS_H_

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

// Data-parallel inner loops used by the dense layers, the optimizer and the
// fingerprint comparisons. Every kernel has a scalar reference implementation;
// vectorized variants are selected once at runtime from the host CPU features
// (override with TFLOW_KERNELS=scalar|avx2|neon).

namespace tflow::kernels {

struct AdamCoeffs {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias1;  // 1 / (1 - beta1^t)
  double bias2;  // 1 / (1 - beta2^t)
};

struct KernelTable {
  std::string_view name;

  double (*dot)(const double *a, const double *b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double *x, double *y, std::size_t n);
  // y += W x, W row-major rows x cols
  void (*gemv)(const double *w, std::size_t rows, std::size_t cols,
               const double *x, double *y);
  // y += W^T x, W row-major rows x cols, x has rows entries
  void (*gemv_t)(const double *w, std::size_t rows, std::size_t cols,
                 const double *x, double *y);
  // W += alpha * u v^T, W row-major rows x cols
  void (*ger)(double alpha, const double *u, std::size_t rows, const double *v,
              std::size_t cols, double *w);
  double (*sq_dist)(const double *a, const double *b, std::size_t n);
  void (*adam)(double *param, const double *grad, double *m, double *v,
               std::size_t n, const AdamCoeffs &c);
  // popcount(a & b) and popcount(a | b) over n words
  void (*and_or_popcount)(const std::uint64_t *a, const std::uint64_t *b,
                          std::size_t n, std::uint64_t *and_count,
                          std::uint64_t *or_count);
};

const KernelTable &scalar_table();

// Tables usable on this host, scalar first.
std::vector<const KernelTable *> available_tables();

// The table in use by the library.
const KernelTable &active();

// Forces a table by name; returns false if it is unavailable on this host.
bool select(std::string_view name);

inline double dot(const double *a, const double *b, std::size_t n) {
  return active().dot(a, b, n);
}

inline void axpy(double alpha, const double *x, double *y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}

inline void gemv(const double *w, std::size_t rows, std::size_t cols,
                 const double *x, double *y) {
  active().gemv(w, rows, cols, x, y);
}

inline void gemv_t(const double *w, std::size_t rows, std::size_t cols,
                   const double *x, double *y) {
  active().gemv_t(w, rows, cols, x, y);
}

inline void ger(double alpha, const double *u, std::size_t rows,
                const double *v, std::size_t cols, double *w) {
  active().ger(alpha, u, rows, v, cols, w);
}

inline double sq_dist(const double *a, const double *b, std::size_t n) {
  return active().sq_dist(a, b, n);
}

}  // namespace tflow::kernels

#endif  // TFLOW_KERNELS_H_
