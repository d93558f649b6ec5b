//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/flow/layers.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tflow/error.h"
#include "tflow/kernels.h"

namespace tflow {

double sigmoid(double x) {
  if (x >= 0.0)
    return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  if (x >= 0.0)
    return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

constexpr double kSingularThreshold = 1e-12;

void check_size(std::size_t got, std::size_t want, const char *what) {
  if (got != want)
    throw Error(Errc::kShape, std::string(what) + ": expected "
                                  + std::to_string(want) + " entries, got "
                                  + std::to_string(got));
}

}  // namespace

// ---------------------------------------------------------------------------
// Actnorm

Actnorm::Actnorm(ParamStore &store, const std::string &prefix, int channels,
                 int spatial)
    : channels_(channels), spatial_(spatial) {
  const auto c = static_cast<std::size_t>(channels);
  scale_ = store.add(prefix + ".scale", { c });
  bias_ = store.add(prefix + ".bias", { c });
  flag_ = store.add(prefix + ".initialized", { 1 }, false);
  std::fill_n(store.values(scale_).begin(), c, 1.0);
}

bool Actnorm::initialized(std::span<const double> theta) const {
  return flag_.of(theta)[0] != 0.0;
}

void Actnorm::check(std::span<const double> theta) const {
  if (!initialized(theta))
    throw Error(Errc::kNotInitialized, "actnorm used before initialization");
  for (const double s: scale_.of(theta)) {
    if (s == 0.0)
      throw Error(Errc::kZeroScale, "actnorm scale has a zero entry");
  }
}

void Actnorm::initialize(std::span<double> theta,
                         const std::vector<std::vector<double>> &batch) const {
  if (batch.empty())
    throw Error(Errc::kEmpty, "actnorm initialization needs a data batch");
  auto scale = scale_.of(theta);
  auto bias = bias_.of(theta);
  const double count = static_cast<double>(batch.size()) * spatial_;
  for (int c = 0; c < channels_; ++c) {
    double mean = 0.0;
    for (const auto &x: batch) {
      check_size(x.size(), dim(), "actnorm init");
      for (int p = 0; p < spatial_; ++p)
        mean += x[c * spatial_ + p];
    }
    mean /= count;
    double var = 0.0;
    for (const auto &x: batch) {
      for (int p = 0; p < spatial_; ++p) {
        const double d = x[c * spatial_ + p] - mean;
        var += d * d;
      }
    }
    var /= count;
    bias[c] = -mean;
    scale[c] = 1.0 / std::max(std::sqrt(var), 1e-6);
  }
  flag_.of(theta)[0] = 1.0;
}

double Actnorm::forward(std::span<const double> theta,
                        std::span<const double> x, std::span<double> y,
                        Cache *cache) const {
  check(theta);
  check_size(x.size(), dim(), "actnorm input");
  check_size(y.size(), dim(), "actnorm output");
  const auto scale = scale_.of(theta);
  const auto bias = bias_.of(theta);
  if (cache != nullptr)
    cache->x.assign(x.begin(), x.end());
  double logdet = 0.0;
  for (int c = 0; c < channels_; ++c) {
    for (int p = 0; p < spatial_; ++p) {
      const int i = c * spatial_ + p;
      y[i] = scale[c] * (x[i] + bias[c]);
    }
    logdet += std::log(std::abs(scale[c]));
  }
  return spatial_ * logdet;
}

double Actnorm::inverse(std::span<const double> theta,
                        std::span<const double> y, std::span<double> x) const {
  check(theta);
  check_size(y.size(), dim(), "actnorm input");
  check_size(x.size(), dim(), "actnorm output");
  const auto scale = scale_.of(theta);
  const auto bias = bias_.of(theta);
  double logdet = 0.0;
  for (int c = 0; c < channels_; ++c) {
    for (int p = 0; p < spatial_; ++p) {
      const int i = c * spatial_ + p;
      x[i] = y[i] / scale[c] - bias[c];
    }
    logdet -= std::log(std::abs(scale[c]));
  }
  return spatial_ * logdet;
}

void Actnorm::backward(std::span<const double> theta, const Cache &cache,
                       std::span<const double> dy, double dlogdet,
                       std::span<double> dx, std::span<double> grad) const {
  if (static_cast<int>(cache.x.size()) != dim())
    throw Error(Errc::kNoCache, "actnorm backward without a forward cache");
  const auto scale = scale_.of(theta);
  const auto bias = bias_.of(theta);
  auto gscale = scale_.of(grad);
  auto gbias = bias_.of(grad);
  for (int c = 0; c < channels_; ++c) {
    double ds = 0.0, db = 0.0;
    for (int p = 0; p < spatial_; ++p) {
      const int i = c * spatial_ + p;
      ds += dy[i] * (cache.x[i] + bias[c]);
      db += dy[i];
      dx[i] = scale[c] * dy[i];
    }
    gscale[c] += ds + dlogdet * spatial_ / scale[c];
    gbias[c] += db * scale[c];
  }
}

// ---------------------------------------------------------------------------
// ChannelMixer

std::vector<double> random_rotation(int n, Rng &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<RowMatrix> qr(g);
  RowMatrix q = qr.householderQ();
  // Fix column signs by the diagonal of R for a unique factorization, then
  // flip one column if needed to land in SO(n).
  const RowMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0.0)
      q.col(j) = -q.col(j);
  }
  if (q.determinant() < 0.0)
    q.col(0) = -q.col(0);
  return std::vector<double>(q.data(), q.data() + static_cast<std::size_t>(n) * n);
}

ChannelMixer::ChannelMixer(ParamStore &store, const std::string &prefix,
                           int channels, int spatial, Rng &rng)
    : channels_(channels), spatial_(spatial) {
  const auto c = static_cast<std::size_t>(channels);
  weight_ = store.add(prefix + ".weight", { c, c });
  const std::vector<double> rot = random_rotation(channels, rng);
  std::copy(rot.begin(), rot.end(), store.values(weight_).begin());
}

namespace {

double checked_log_abs_det(const RowMatrix &w) {
  const double det = Eigen::PartialPivLU<RowMatrix>(w).determinant();
  if (!(std::abs(det) >= kSingularThreshold))
    throw Error(Errc::kSingular, "channel mixer matrix is singular");
  return std::log(std::abs(det));
}

}  // namespace

double ChannelMixer::forward(std::span<const double> theta,
                             std::span<const double> x, std::span<double> y,
                             Cache *cache) const {
  check_size(x.size(), dim(), "mixer input");
  check_size(y.size(), dim(), "mixer output");
  const int c = channels_;
  const int s = spatial_;
  const ConstMatrixMap w(weight_.of(theta).data(), c, c);
  const double logdet = checked_log_abs_det(w);
  if (cache != nullptr)
    cache->x.assign(x.begin(), x.end());
  std::fill(y.begin(), y.end(), 0.0);
  for (int o = 0; o < c; ++o) {
    for (int i = 0; i < c; ++i)
      kernels::axpy(w(o, i), x.data() + i * s, y.data() + o * s, s);
  }
  return s * logdet;
}

double ChannelMixer::inverse(std::span<const double> theta,
                             std::span<const double> y,
                             std::span<double> x) const {
  check_size(y.size(), dim(), "mixer input");
  check_size(x.size(), dim(), "mixer output");
  const int c = channels_;
  const int s = spatial_;
  const ConstMatrixMap w(weight_.of(theta).data(), c, c);
  const double logdet = checked_log_abs_det(w);
  const RowMatrix winv = w.inverse();
  std::fill(x.begin(), x.end(), 0.0);
  for (int o = 0; o < c; ++o) {
    for (int i = 0; i < c; ++i)
      kernels::axpy(winv(o, i), y.data() + i * s, x.data() + o * s, s);
  }
  return -s * logdet;
}

void ChannelMixer::backward(std::span<const double> theta, const Cache &cache,
                            std::span<const double> dy, double dlogdet,
                            std::span<double> dx, std::span<double> grad) const {
  if (static_cast<int>(cache.x.size()) != dim())
    throw Error(Errc::kNoCache, "mixer backward without a forward cache");
  const int c = channels_;
  const int s = spatial_;
  const ConstMatrixMap w(weight_.of(theta).data(), c, c);
  auto gw = weight_.of(grad);
  std::fill(dx.begin(), dx.end(), 0.0);
  for (int o = 0; o < c; ++o) {
    for (int i = 0; i < c; ++i) {
      kernels::axpy(w(o, i), dy.data() + o * s, dx.data() + i * s, s);
      gw[o * c + i] += kernels::dot(dy.data() + o * s, cache.x.data() + i * s, s);
    }
  }
  if (dlogdet != 0.0) {
    // d log|det W| / dW = W^{-T}
    const RowMatrix winv_t = w.inverse().transpose();
    for (int o = 0; o < c; ++o) {
      for (int i = 0; i < c; ++i)
        gw[o * c + i] += dlogdet * s * winv_t(o, i);
    }
  }
}

// ---------------------------------------------------------------------------
// AffineCoupling

AffineCoupling::AffineCoupling(ParamStore &store, const std::string &prefix,
                               std::vector<int> visible, std::vector<int> hidden,
                               int width, Rng &rng)
    : visible_(std::move(visible)), hidden_(std::move(hidden)), width_(width) {
  if (visible_.empty() || hidden_.empty() || width_ < 1)
    throw Error(Errc::kShape, "coupling needs 0 < d < D and a positive width");
  const auto d = visible_.size();
  const auto m = hidden_.size();
  const auto h = static_cast<std::size_t>(width_);
  w1_ = store.add(prefix + ".w1", { h, d });
  b1_ = store.add(prefix + ".b1", { h });
  w2_ = store.add(prefix + ".w2", { 2 * m, h });
  b2_ = store.add(prefix + ".b2", { 2 * m });
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(double(d)));
  for (double &v: store.values(w1_))
    v = normal(rng);
}

void AffineCoupling::check_dim(std::size_t n) const {
  check_size(n, static_cast<std::size_t>(dim()), "coupling");
}

void AffineCoupling::conditioner(std::span<const double> theta,
                                 std::span<const double> x,
                                 std::span<double> s, std::span<double> t,
                                 std::vector<double> *h_out) const {
  const std::size_t d = visible_.size();
  const std::size_t m = hidden_.size();
  std::vector<double> xv(d);
  for (std::size_t i = 0; i < d; ++i)
    xv[i] = x[visible_[i]];

  std::vector<double> h(b1_.of(theta).begin(), b1_.of(theta).end());
  kernels::gemv(w1_.of(theta).data(), width_, d, xv.data(), h.data());
  for (double &v: h)
    v = std::tanh(v);

  std::vector<double> out(b2_.of(theta).begin(), b2_.of(theta).end());
  kernels::gemv(w2_.of(theta).data(), 2 * m, width_, h.data(), out.data());
  std::copy_n(out.begin(), m, s.begin());
  std::copy_n(out.begin() + m, m, t.begin());
  if (h_out != nullptr)
    *h_out = std::move(h);
}

double AffineCoupling::forward(std::span<const double> theta,
                               std::span<const double> x, std::span<double> y,
                               Cache *cache) const {
  check_dim(x.size());
  check_dim(y.size());
  const std::size_t m = hidden_.size();
  std::vector<double> s(m), t(m), h;
  conditioner(theta, x, s, t, &h);

  std::copy(x.begin(), x.end(), y.begin());
  double logdet = 0.0;
  std::vector<double> sig(m);
  for (std::size_t k = 0; k < m; ++k) {
    sig[k] = sigmoid(s[k]);
    y[hidden_[k]] = x[hidden_[k]] * sig[k] + t[k];
    logdet += log_sigmoid(s[k]);
  }
  if (cache != nullptr) {
    cache->filled = true;
    cache->x.assign(x.begin(), x.end());
    cache->h = std::move(h);
    cache->sig = std::move(sig);
  }
  return logdet;
}

double AffineCoupling::inverse(std::span<const double> theta,
                               std::span<const double> y,
                               std::span<double> x) const {
  check_dim(y.size());
  check_dim(x.size());
  const std::size_t m = hidden_.size();
  std::vector<double> s(m), t(m);
  // Visible coordinates are unchanged, so the conditioner sees the same input.
  conditioner(theta, y, s, t);
  std::copy(y.begin(), y.end(), x.begin());
  double logdet = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    x[hidden_[k]] = (y[hidden_[k]] - t[k]) / sigmoid(s[k]);
    logdet -= log_sigmoid(s[k]);
  }
  return logdet;
}

void AffineCoupling::backward(std::span<const double> theta,
                              const Cache &cache, std::span<const double> dy,
                              double dlogdet, std::span<double> dx,
                              std::span<double> grad) const {
  if (!cache.filled)
    throw Error(Errc::kNoCache, "coupling backward without a forward cache");
  check_dim(dy.size());
  check_dim(dx.size());
  const std::size_t d = visible_.size();
  const std::size_t m = hidden_.size();

  // d(out) for out = [s; t]
  std::vector<double> dout(2 * m);
  for (std::size_t k = 0; k < m; ++k) {
    const double sg = cache.sig[k];
    const double dyk = dy[hidden_[k]];
    dout[k] = dyk * cache.x[hidden_[k]] * sg * (1.0 - sg)
              + dlogdet * (1.0 - sg);
    dout[m + k] = dyk;
  }

  auto gb2 = b2_.of(grad);
  for (std::size_t k = 0; k < 2 * m; ++k)
    gb2[k] += dout[k];
  kernels::ger(1.0, dout.data(), 2 * m, cache.h.data(), width_,
               w2_.of(grad).data());

  std::vector<double> dpre(width_, 0.0);
  kernels::gemv_t(w2_.of(theta).data(), 2 * m, width_, dout.data(),
                  dpre.data());
  for (int j = 0; j < width_; ++j)
    dpre[j] *= 1.0 - cache.h[j] * cache.h[j];

  std::vector<double> xv(d);
  for (std::size_t i = 0; i < d; ++i)
    xv[i] = cache.x[visible_[i]];
  auto gb1 = b1_.of(grad);
  for (int j = 0; j < width_; ++j)
    gb1[j] += dpre[j];
  kernels::ger(1.0, dpre.data(), width_, xv.data(), d, w1_.of(grad).data());

  std::vector<double> dxv(d, 0.0);
  kernels::gemv_t(w1_.of(theta).data(), width_, d, dpre.data(), dxv.data());

  for (std::size_t i = 0; i < d; ++i)
    dx[visible_[i]] = dy[visible_[i]] + dxv[i];
  for (std::size_t k = 0; k < m; ++k)
    dx[hidden_[k]] = dy[hidden_[k]] * cache.sig[k];
}

}  // namespace tflow
