//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_FLOW_LAYERS_H_
#define TFLOW_FLOW_LAYERS_H_

#include <span>
#include <string>
#include <vector>

#include "tflow/flow/params.h"
#include "tflow/rng.h"

// Invertible layers over flat real tensors. Conventions shared by every layer:
//
//  * theta is the flat parameter vector of the owning ParamStore, grad a
//    buffer of the same length that backward() accumulates into.
//  * forward() returns log|det dy/dx|; inverse() returns log|det dx/dy|,
//    i.e. the negated forward log-det at the matching point.
//  * backward() takes dL/dy and dL/dlogdet and writes dL/dx, using the cache
//    filled by forward(). A cache that was never filled gives E_NO_CACHE.
//  * Tensors are channel-major: element (c, p) of a C-channel tensor with
//    spatial size S sits at c * S + p.

namespace tflow {

double log_sigmoid(double x);
double sigmoid(double x);

// Per-channel affine normalization y = scale * (x + bias), initialized from
// data so the first batch has zero mean and unit variance per channel.
class Actnorm {
public:
  struct Cache {
    std::vector<double> x;
  };

  Actnorm() = default;
  Actnorm(ParamStore &store, const std::string &prefix, int channels,
          int spatial);

  int channels() const { return channels_; }
  int spatial() const { return spatial_; }
  int dim() const { return channels_ * spatial_; }

  bool initialized(std::span<const double> theta) const;
  // Sets bias = -mean and scale = 1/std per channel over all samples and
  // positions of the batch (population statistics).
  void initialize(std::span<double> theta,
                  const std::vector<std::vector<double>> &batch) const;

  double forward(std::span<const double> theta, std::span<const double> x,
                 std::span<double> y, Cache *cache = nullptr) const;
  double inverse(std::span<const double> theta, std::span<const double> y,
                 std::span<double> x) const;
  void backward(std::span<const double> theta, const Cache &cache,
                std::span<const double> dy, double dlogdet,
                std::span<double> dx, std::span<double> grad) const;

  ParamRef scale_ref() const { return scale_; }
  ParamRef bias_ref() const { return bias_; }
  ParamRef flag_ref() const { return flag_; }

private:
  void check(std::span<const double> theta) const;

  int channels_ = 0;
  int spatial_ = 0;
  ParamRef scale_;
  ParamRef bias_;
  ParamRef flag_;
};

// Invertible 1x1 convolution: the same C x C matrix W mixes the channels at
// every spatial position. Initialized to a random rotation (log|det W| = 0).
class ChannelMixer {
public:
  struct Cache {
    std::vector<double> x;
  };

  ChannelMixer() = default;
  ChannelMixer(ParamStore &store, const std::string &prefix, int channels,
               int spatial, Rng &rng);

  int channels() const { return channels_; }
  int spatial() const { return spatial_; }
  int dim() const { return channels_ * spatial_; }

  // E_SINGULAR when |det W| < 1e-12.
  double forward(std::span<const double> theta, std::span<const double> x,
                 std::span<double> y, Cache *cache = nullptr) const;
  double inverse(std::span<const double> theta, std::span<const double> y,
                 std::span<double> x) const;
  void backward(std::span<const double> theta, const Cache &cache,
                std::span<const double> dy, double dlogdet,
                std::span<double> dx, std::span<double> grad) const;

  ParamRef weight_ref() const { return weight_; }

private:
  int channels_ = 0;
  int spatial_ = 0;
  ParamRef weight_;
};

// Random rotation matrix (n x n, row-major, det +1) from the QR decomposition
// of a Gaussian matrix.
std::vector<double> random_rotation(int n, Rng &rng);

// Sigmoid affine coupling. The coordinates listed in `visible` pass through
// and feed a two-layer tanh conditioner; the `hidden` coordinates become
// x * sigmoid(s) + t with (s, t) from the conditioner. The contiguous split of
// size d is visible = [0, d), hidden = [d, D).
class AffineCoupling {
public:
  struct Cache {
    bool filled = false;
    std::vector<double> x;
    std::vector<double> h;    // conditioner hidden activations
    std::vector<double> sig;  // sigmoid(s) per hidden coordinate
  };

  AffineCoupling() = default;
  AffineCoupling(ParamStore &store, const std::string &prefix,
                 std::vector<int> visible, std::vector<int> hidden, int width,
                 Rng &rng);

  int dim() const { return static_cast<int>(visible_.size() + hidden_.size()); }
  const std::vector<int> &visible() const { return visible_; }
  const std::vector<int> &hidden() const { return hidden_; }

  // Scale logits s and translations t for the visible part of x.
  void conditioner(std::span<const double> theta, std::span<const double> x,
                   std::span<double> s, std::span<double> t,
                   std::vector<double> *h = nullptr) const;

  double forward(std::span<const double> theta, std::span<const double> x,
                 std::span<double> y, Cache *cache = nullptr) const;
  double inverse(std::span<const double> theta, std::span<const double> y,
                 std::span<double> x) const;
  void backward(std::span<const double> theta, const Cache &cache,
                std::span<const double> dy, double dlogdet,
                std::span<double> dx, std::span<double> grad) const;

  ParamRef w1_ref() const { return w1_; }
  ParamRef b1_ref() const { return b1_; }
  ParamRef w2_ref() const { return w2_; }
  ParamRef b2_ref() const { return b2_; }

private:
  void check_dim(std::size_t n) const;

  std::vector<int> visible_;
  std::vector<int> hidden_;
  int width_ = 0;
  ParamRef w1_;  // width x d
  ParamRef b1_;  // width
  ParamRef w2_;  // 2(D - d) x width; rows [0, D-d) are s, the rest t
  ParamRef b2_;  // 2(D - d)
};

}  // namespace tflow

#endif  // TFLOW_FLOW_LAYERS_H_
