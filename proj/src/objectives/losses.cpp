//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/objectives/losses.h"

#include <cmath>
#include <limits>
#include <random>

#include "tflow/error.h"
#include "tflow/kernels.h"

namespace tflow {
namespace {

void check_rect(const Vectors &v) {
  for (const auto &x: v) {
    if (x.size() != v.front().size())
      throw Error(Errc::kShape, "vectors differ in length");
  }
}

double norm(std::span<const double> x) {
  return std::sqrt(kernels::dot(x.data(), x.data(), x.size()));
}

}  // namespace

std::vector<double> batch_std(const Vectors &embeddings) {
  if (embeddings.empty())
    throw Error(Errc::kEmpty, "standard deviation of an empty batch");
  check_rect(embeddings);
  const std::size_t d = embeddings.front().size();
  const double l = static_cast<double>(embeddings.size());
  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  for (const auto &z: embeddings) {
    for (std::size_t i = 0; i < d; ++i)
      mean[i] += z[i];
  }
  for (double &m: mean)
    m /= l;
  for (const auto &z: embeddings) {
    for (std::size_t i = 0; i < d; ++i)
      sd[i] += (z[i] - mean[i]) * (z[i] - mean[i]);
  }
  for (double &s: sd)
    s = std::sqrt(s / l);
  return sd;
}

std::vector<double> space_noise(std::span<const double> sigma, double lambda,
                                Rng &rng) {
  if (!(lambda >= 0.0))
    throw Error(Errc::kRange, "space lambda must be non-negative");
  std::vector<double> eps(sigma.size(), 0.0);
  if (lambda == 0.0)
    return eps;
  const double root = std::sqrt(lambda);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] >= 0.0))
      throw Error(Errc::kRange, "space sigma must be non-negative");
    eps[i] = root * sigma[i] * normal(rng);
  }
  return eps;
}

std::vector<double> sample_space(std::span<const double> z_t,
                                 std::span<const double> sigma, double lambda,
                                 Rng &rng) {
  if (z_t.size() != sigma.size())
    throw Error(Errc::kShape, "sigma does not match the embedding size");
  std::vector<double> out(z_t.begin(), z_t.end());
  if (lambda == 0.0)
    return out;
  const std::vector<double> eps = space_noise(sigma, lambda, rng);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] += eps[i];
  return out;
}

double gaussian_kernel(std::span<const double> x, std::span<const double> y,
                       double t) {
  if (x.size() != y.size())
    throw Error(Errc::kShape, "kernel arguments differ in length");
  if (!(t > 0.0))
    throw Error(Errc::kRange, "kernel temperature must be positive");
  if (std::abs(norm(x) - 1.0) > 1e-6 || std::abs(norm(y) - 1.0) > 1e-6)
    throw Error(Errc::kNotNormalized, "kernel arguments must be unit vectors");
  return std::exp(-t * kernels::sq_dist(x.data(), y.data(), x.size()));
}

AlignResult align_loss(const Vectors &anchors, const Vectors &latents) {
  if (anchors.empty())
    throw Error(Errc::kEmpty, "alignment over an empty batch");
  if (anchors.size() != latents.size())
    throw Error(Errc::kShape, "anchor and latent counts differ");
  const double b = static_cast<double>(anchors.size());
  AlignResult r;
  r.grad_latent.resize(anchors.size());
  for (std::size_t s = 0; s < anchors.size(); ++s) {
    const auto &a = anchors[s];
    const auto &z = latents[s];
    if (a.size() != z.size())
      throw Error(Errc::kShape, "anchor and latent dimensions differ");
    const double dist = std::sqrt(kernels::sq_dist(a.data(), z.data(), a.size()));
    r.value += dist / b;
    auto &g = r.grad_latent[s];
    g.assign(z.size(), 0.0);
    if (dist > 0.0) {
      for (std::size_t i = 0; i < z.size(); ++i)
        g[i] = (z[i] - a[i]) / (dist * b);
    }
  }
  return r;
}

UnifResult unif_loss(const Vectors &embeddings, double t) {
  const std::size_t n = embeddings.size();
  if (n < 2)
    throw Error(Errc::kBatchTooSmall,
                "uniformity needs at least two distinct targets");
  if (!(t > 0.0))
    throw Error(Errc::kRange, "kernel temperature must be positive");
  check_rect(embeddings);
  const std::size_t d = embeddings.front().size();

  Vectors unit(n);
  std::vector<double> norms(n);
  for (std::size_t x = 0; x < n; ++x) {
    norms[x] = norm(embeddings[x]);
    if (norms[x] == 0.0)
      throw Error(Errc::kNotNormalized, "zero embedding cannot be normalized");
    unit[x].resize(d);
    for (std::size_t i = 0; i < d; ++i)
      unit[x][i] = embeddings[x][i] / norms[x];
  }

  // Unordered pairs, each counted twice.
  std::vector<double> kern(n * n, 0.0);
  double sum = 0.0;
  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      const double sq = kernels::sq_dist(unit[x].data(), unit[y].data(), d);
      const double k = std::exp(-t * sq);
      kern[x * n + y] = kern[y * n + x] = k;
      sum += 2.0 * k;
      min_dist = std::min(min_dist, std::sqrt(sq));
    }
  }
  const double pairs = static_cast<double>(n * (n - 1));
  const double mean = sum / pairs;

  UnifResult r;
  r.value = std::log(mean);
  r.min_pair_distance = min_dist;
  r.grad.assign(n, std::vector<double>(d, 0.0));
  // dL/du_x = (1 / (pairs * mean)) * sum_y 2 k_xy (-2t) (u_x - u_y)
  const double scale = -4.0 * t / (pairs * mean);
  for (std::size_t x = 0; x < n; ++x) {
    std::vector<double> gu(d, 0.0);
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x)
        continue;
      const double k = kern[x * n + y];
      for (std::size_t i = 0; i < d; ++i)
        gu[i] += scale * k * (unit[x][i] - unit[y][i]);
    }
    // Through the normalization: (I - u u^T) / |z|
    const double proj = kernels::dot(gu.data(), unit[x].data(), d);
    for (std::size_t i = 0; i < d; ++i)
      r.grad[x][i] = (gu[i] - proj * unit[x][i]) / norms[x];
  }
  return r;
}

LossReport total_loss(double align, double unif, const LossWeights &w) {
  if (!std::isfinite(align) || !std::isfinite(unif))
    throw Error(Errc::kNonFinite, "loss term is not finite");
  LossReport r;
  r.align = align;
  r.unif = unif;
  r.total = w.align * align + w.unif * unif;
  return r;
}

}  // namespace tflow
