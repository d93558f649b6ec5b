//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "support/oracles.h"
#include "tflow/error.h"
#include "tflow/objectives/losses.h"

namespace tflow {
namespace {

using Vec = std::vector<double>;

Errc code_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return Errc::kEmpty;
}

TEST(BatchStd, PopulationStatistics) {
  const Vec s = batch_std({ { 1.0, 5.0 }, { 3.0, 5.0 } });
  EXPECT_DOUBLE_EQ(s[0], 1.0);
  EXPECT_DOUBLE_EQ(s[1], 0.0);
  EXPECT_EQ(code_of([] { batch_std({}); }), Errc::kEmpty);
  EXPECT_EQ(code_of([] { batch_std({ { 1.0 }, { 1.0, 2.0 } }); }), Errc::kShape);
}

TEST(SpaceNoise, MonteCarloVariance) {
  Rng rng(1);
  const Vec sigma = { 1.0, 1.0 };
  double sum[2] = { 0, 0 }, sq[2] = { 0, 0 };
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Vec e = space_noise(sigma, 0.1, rng);
    for (int d = 0; d < 2; ++d) {
      sum[d] += e[d];
      sq[d] += e[d] * e[d];
    }
  }
  for (int d = 0; d < 2; ++d) {
    const double mean = sum[d] / n;
    EXPECT_NEAR(sq[d] / n - mean * mean, 0.1, 0.005);
  }
  EXPECT_EQ(code_of([&] { space_noise(sigma, -0.1, rng); }), Errc::kRange);
}

TEST(SampleSpace, ZeroLambdaIsIdentity) {
  Rng rng(2), untouched(2);
  const Vec z = { 0.3, -2.0, 7.5 };
  EXPECT_EQ(sample_space(z, Vec { 1, 2, 3 }, 0.0, rng), z);
  EXPECT_EQ(rng(), untouched());
}

TEST(GaussianKernel, ValuesAndErrors) {
  const Vec a = { 1.0, 0.0 }, b = { 0.0, 1.0 };
  EXPECT_DOUBLE_EQ(gaussian_kernel(a, a, 2.0), 1.0);
  EXPECT_NEAR(gaussian_kernel(a, b, 2.0), std::exp(-4.0), 1e-15);
  EXPECT_EQ(code_of([&] { gaussian_kernel(Vec { 2.0, 0.0 }, b, 2.0); }),
            Errc::kNotNormalized);
  EXPECT_EQ(code_of([&] { gaussian_kernel(a, b, 0.0); }), Errc::kRange);
}

TEST(AlignLoss, ValueAndGradient) {
  const Vectors anchors = { { 0.0, 0.0 }, { 1.0, 1.0 } };
  const Vectors latents = { { 3.0, 4.0 }, { 1.0, 1.0 } };
  const AlignResult r = align_loss(anchors, latents);
  EXPECT_DOUBLE_EQ(r.value, 2.5);
  EXPECT_NEAR(r.grad_latent[0][0], 0.5 * 3.0 / 5.0, 1e-15);
  EXPECT_NEAR(r.grad_latent[0][1], 0.5 * 4.0 / 5.0, 1e-15);
  EXPECT_EQ(r.grad_latent[1][0], 0.0);
  EXPECT_EQ(code_of([] { align_loss({}, {}); }), Errc::kEmpty);
  EXPECT_EQ(code_of([&] { align_loss(anchors, { { 1.0, 2.0 } }); }), Errc::kShape);
}

TEST(AlignLoss, GradientAgainstFiniteDifferences) {
  Rng rng(3);
  std::normal_distribution<double> normal;
  Vectors anchors(4, Vec(3)), latents(4, Vec(3));
  for (auto *set: { &anchors, &latents })
    for (auto &v: *set)
      for (double &x: v)
        x = normal(rng);
  const AlignResult r = align_loss(anchors, latents);
  for (int s = 0; s < 4; ++s) {
    for (int d = 0; d < 3; ++d) {
      const double num = oracle::partial(
          [&](const Vec &v) {
            Vectors l = latents;
            l[s] = v;
            return align_loss(anchors, l).value;
          },
          latents[s], d);
      EXPECT_NEAR(r.grad_latent[s][d], num, 1e-8);
    }
  }
}

TEST(UnifLoss, IdenticalPairIsZero) {
  const UnifResult r = unif_loss({ { 0.6, 0.8 }, { 1.2, 1.6 } }, 2.0);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.min_pair_distance, 0.0);
}

TEST(UnifLoss, AntipodalPair) {
  const UnifResult r = unif_loss({ { 1.0, 0.0, 0.0 }, { -3.0, 0.0, 0.0 } }, 2.0);
  EXPECT_NEAR(r.value, -8.0, 1e-9);
  EXPECT_NEAR(r.min_pair_distance, 2.0, 1e-15);
}

TEST(UnifLoss, SquareOnCircleMatchesDirectSum) {
  // Unit square vertices: 8 ordered pairs at squared distance 2, 4 at 4.
  const Vectors square = { { 1, 0 }, { 0, 1 }, { -1, 0 }, { 0, -1 } };
  const double direct = oracle::unif_direct(square, 2.0);
  EXPECT_NEAR(direct, std::log((8.0 * std::exp(-4.0) + 4.0 * std::exp(-8.0)) / 12.0),
              1e-12);
  const UnifResult r = unif_loss(square, 2.0);
  EXPECT_NEAR(r.value, direct, 1e-12);
  EXPECT_NEAR(r.min_pair_distance, std::numbers::sqrt2, 1e-15);
  // The same configuration at t = 4 gives log((8e^-8 + 4e^-16) / 12).
  EXPECT_NEAR(unif_loss(square, 4.0).value, -8.4052, 1e-3);
}

TEST(UnifLoss, GradientAgainstFiniteDifferences) {
  Rng rng(4);
  std::normal_distribution<double> normal;
  Vectors z(5, Vec(4));
  for (auto &v: z)
    for (double &x: v)
      x = normal(rng);
  const UnifResult r = unif_loss(z, 2.0);
  EXPECT_NEAR(r.value, oracle::unif_direct(z, 2.0), 1e-12);
  EXPECT_LE(r.value, 0.0);
  for (std::size_t s = 0; s < z.size(); ++s) {
    for (int d = 0; d < 4; ++d) {
      const double num = oracle::partial(
          [&](const Vec &v) {
            Vectors zz = z;
            zz[s] = v;
            return oracle::unif_direct(zz, 2.0);
          },
          z[s], d);
      EXPECT_NEAR(r.grad[s][d], num, 1e-8);
    }
  }
}

TEST(UnifLoss, Errors) {
  EXPECT_EQ(code_of([] { unif_loss({ { 1.0, 0.0 } }, 2.0); }), Errc::kBatchTooSmall);
  EXPECT_EQ(code_of([] { unif_loss({ { 1.0, 0.0 }, { 0.0, 0.0 } }, 2.0); }),
            Errc::kNotNormalized);
}

TEST(UnifLoss, ProjectedDescentSeparatesTwoPoints) {
  Rng rng(5);
  std::normal_distribution<double> normal;
  Vectors p(2, Vec(3));
  auto normalize = [](Vec &v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (double &x: v)
      x /= n;
  };
  for (auto &v: p) {
    for (double &x: v)
      x = normal(rng);
    normalize(v);
  }
  double cosine = 1.0;
  for (int step = 0; step < 500 && cosine >= -0.99; ++step) {
    const UnifResult r = unif_loss(p, 2.0);
    for (int s = 0; s < 2; ++s) {
      for (int d = 0; d < 3; ++d)
        p[s][d] -= 0.1 * r.grad[s][d];
      normalize(p[s]);
    }
    cosine = p[0][0] * p[1][0] + p[0][1] * p[1][1] + p[0][2] * p[1][2];
  }
  EXPECT_LT(cosine, -0.99);
}

TEST(TotalLoss, LinearCombination) {
  EXPECT_EQ(total_loss(0.0, 0.0).total, 0.0);
  EXPECT_DOUBLE_EQ(total_loss(1.5, -2.0).total, -0.5);
  EXPECT_DOUBLE_EQ(total_loss(1.5, -2.0, { 2.0, 0.5 }).total, 2.0);
  EXPECT_EQ(code_of([] { total_loss(std::numeric_limits<double>::quiet_NaN(), 0.0); }),
            Errc::kNonFinite);
  EXPECT_EQ(code_of([] { total_loss(0.0, std::numeric_limits<double>::infinity()); }),
            Errc::kNonFinite);
}

}  // namespace
}  // namespace tflow
