//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_OBJECTIVES_LOSSES_H_
#define TFLOW_OBJECTIVES_LOSSES_H_

#include <span>
#include <vector>

#include "tflow/rng.h"

namespace tflow {

using Vectors = std::vector<std::vector<double>>;

// Elementwise population standard deviation. E_EMPTY on an empty list,
// E_SHAPE on ragged input.
std::vector<double> batch_std(const Vectors &embeddings);

// Draw eps ~ N(0, lambda * sigma^2) elementwise. E_RANGE if lambda < 0 or a
// sigma entry is negative.
std::vector<double> space_noise(std::span<const double> sigma, double lambda,
                                Rng &rng);

// z_t + space_noise(sigma, lambda). lambda = 0 returns z_t unchanged and
// consumes no randomness.
std::vector<double> sample_space(std::span<const double> z_t,
                                 std::span<const double> sigma, double lambda,
                                 Rng &rng);

// exp(-t |x - y|^2) for unit vectors. E_NOT_NORMALIZED if either norm is off
// by more than 1e-6, E_RANGE unless t > 0.
double gaussian_kernel(std::span<const double> x, std::span<const double> y,
                       double t);

struct AlignResult {
  double value = 0.0;
  // d value / d latent_i; the gradient w.r.t. anchor_i is the negation.
  Vectors grad_latent;
};

// Mean Euclidean distance between anchors (space samples) and latents.
// E_SHAPE on mismatched sizes, E_EMPTY on an empty batch.
AlignResult align_loss(const Vectors &anchors, const Vectors &latents);

struct UnifResult {
  double value = 0.0;
  Vectors grad;  // w.r.t. the unnormalized embeddings
  double min_pair_distance = 0.0;  // between normalized embeddings
};

// log of the mean Gaussian potential exp(-t |z_x^ - z_y^|^2) over ordered
// pairs x != y, z^ = z / |z|. One embedding per distinct target.
// E_BATCH_TOO_SMALL with fewer than two, E_NOT_NORMALIZED for a zero vector.
UnifResult unif_loss(const Vectors &embeddings, double t);

struct LossWeights {
  double align = 1.0;
  double unif = 1.0;
};

struct LossReport {
  double align = 0.0;
  double unif = 0.0;
  double logdet = 0.0;  // mean flow log-det (reported; weighted term only)
  double total = 0.0;
  double mean_norm = 0.0;
  double min_pair_distance = 0.0;
};

// total = w.align * align + w.unif * unif. E_NONFINITE on non-finite input.
LossReport total_loss(double align, double unif, const LossWeights &w = {});

}  // namespace tflow

#endif  // TFLOW_OBJECTIVES_LOSSES_H_
