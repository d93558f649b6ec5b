//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <bit>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "tflow/kernels.h"

namespace tflow::kernels {
namespace {

std::vector<double> random_vector(std::mt19937_64 &rng, std::size_t n) {
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (double &x: v)
    x = normal(rng);
  return v;
}

// Lengths around every vector width and remainder path.
const std::size_t kLengths[] = { 0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 63, 64, 65, 342 };

class KernelEquivalence: public ::testing::TestWithParam<const KernelTable *> { };

TEST_P(KernelEquivalence, DotMatchesScalar) {
  const KernelTable &k = *GetParam();
  std::mt19937_64 rng(1);
  for (const std::size_t n: kLengths) {
    const auto a = random_vector(rng, n), b = random_vector(rng, n);
    EXPECT_NEAR(k.dot(a.data(), b.data(), n),
                scalar_table().dot(a.data(), b.data(), n), 1e-12 * (1.0 + n));
  }
}

TEST_P(KernelEquivalence, AxpyAndSqDistMatchScalar) {
  const KernelTable &k = *GetParam();
  std::mt19937_64 rng(2);
  for (const std::size_t n: kLengths) {
    const auto x = random_vector(rng, n);
    auto y1 = random_vector(rng, n);
    auto y2 = y1;
    k.axpy(0.37, x.data(), y1.data(), n);
    scalar_table().axpy(0.37, x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      EXPECT_NEAR(y1[i], y2[i], 1e-14);
    EXPECT_NEAR(k.sq_dist(x.data(), y1.data(), n),
                scalar_table().sq_dist(x.data(), y1.data(), n), 1e-11 * (1.0 + n));
  }
}

TEST_P(KernelEquivalence, MatrixKernelsMatchScalar) {
  const KernelTable &k = *GetParam();
  std::mt19937_64 rng(3);
  for (const std::size_t rows: { 1, 3, 8, 13 }) {
    for (const std::size_t cols: { 1, 4, 5, 17, 64 }) {
      const auto w = random_vector(rng, rows * cols);
      const auto xc = random_vector(rng, cols), xr = random_vector(rng, rows);
      std::vector<double> y1(rows, 0.5), y2(rows, 0.5);
      k.gemv(w.data(), rows, cols, xc.data(), y1.data());
      scalar_table().gemv(w.data(), rows, cols, xc.data(), y2.data());
      for (std::size_t i = 0; i < rows; ++i)
        EXPECT_NEAR(y1[i], y2[i], 1e-12);
      std::vector<double> t1(cols, -1.0), t2(cols, -1.0);
      k.gemv_t(w.data(), rows, cols, xr.data(), t1.data());
      scalar_table().gemv_t(w.data(), rows, cols, xr.data(), t2.data());
      for (std::size_t i = 0; i < cols; ++i)
        EXPECT_NEAR(t1[i], t2[i], 1e-12);
      auto w1 = w, w2 = w;
      k.ger(-0.8, xr.data(), rows, xc.data(), cols, w1.data());
      scalar_table().ger(-0.8, xr.data(), rows, xc.data(), cols, w2.data());
      for (std::size_t i = 0; i < w.size(); ++i)
        EXPECT_NEAR(w1[i], w2[i], 1e-13);
    }
  }
}

TEST_P(KernelEquivalence, AdamMatchesScalar) {
  const KernelTable &k = *GetParam();
  std::mt19937_64 rng(4);
  const AdamCoeffs c { 1e-3, 0.9, 0.999, 1e-8, 1.0 / (1.0 - 0.9 * 0.9),
                       1.0 / (1.0 - 0.999 * 0.999) };
  for (const std::size_t n: kLengths) {
    auto p1 = random_vector(rng, n), m1 = random_vector(rng, n);
    auto v1 = random_vector(rng, n);
    for (double &x: v1)
      x = std::abs(x);
    const auto g = random_vector(rng, n);
    auto p2 = p1, m2 = m1, v2 = v1;
    k.adam(p1.data(), g.data(), m1.data(), v1.data(), n, c);
    scalar_table().adam(p2.data(), g.data(), m2.data(), v2.data(), n, c);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(p1[i], p2[i], 1e-15);
      EXPECT_NEAR(m1[i], m2[i], 1e-15);
      EXPECT_NEAR(v1[i], v2[i], 1e-15);
    }
  }
}

TEST_P(KernelEquivalence, PopcountIsExact) {
  const KernelTable &k = *GetParam();
  std::mt19937_64 rng(5);
  for (const std::size_t n: { 0, 1, 3, 4, 5, 32, 33 }) {
    std::vector<std::uint64_t> a(n), b(n);
    std::uint64_t and_ref = 0, or_ref = 0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng();
      b[i] = rng() & rng();
      and_ref += std::popcount(a[i] & b[i]);
      or_ref += std::popcount(a[i] | b[i]);
    }
    std::uint64_t ac = 0, oc = 0;
    k.and_or_popcount(a.data(), b.data(), n, &ac, &oc);
    EXPECT_EQ(ac, and_ref);
    EXPECT_EQ(oc, or_ref);
  }
}

INSTANTIATE_TEST_SUITE_P(AllTables, KernelEquivalence,
                         ::testing::ValuesIn(available_tables()),
                         [](const auto &info) {
                           return std::string(info.param->name);
                         });

TEST(KernelDispatch, ScalarIsAlwaysAvailableAndSelectable) {
  const auto tables = available_tables();
  ASSERT_FALSE(tables.empty());
  EXPECT_EQ(tables.front()->name, "scalar");
  const std::string_view before = active().name;
  EXPECT_TRUE(select("scalar"));
  EXPECT_EQ(active().name, "scalar");
  EXPECT_FALSE(select("no-such-kernel"));
  EXPECT_TRUE(select(before));
}

TEST(KernelScalar, DotAgainstHandValue) {
  const double a[] = { 1, 2, 3 }, b[] = { 4, -5, 6 };
  EXPECT_EQ(scalar_table().dot(a, b, 3), 12.0);
}

}  // namespace
}  // namespace tflow::kernels
