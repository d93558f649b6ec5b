//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/flow/graph.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "tflow/error.h"
#include "tflow/flow/layers.h"

namespace tflow {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RowMatrix>;
using MMap = Eigen::Map<RowMatrix>;
using CRow = Eigen::Map<const Eigen::RowVectorXd>;
using MRow = Eigen::Map<Eigen::RowVectorXd>;

void check_size(std::size_t got, std::size_t want, const char *what) {
  if (got != want)
    throw Error(Errc::kShape, std::string(what) + ": expected "
                                  + std::to_string(want) + " entries, got "
                                  + std::to_string(got));
}

}  // namespace

GraphContext GraphContext::from_bonds(std::span<const double> bonds_onehot,
                                      const GraphShape &shape) {
  check_size(bonds_onehot.size(), shape.bond_dim(), "bond tensor");
  const int n = shape.max_atoms;
  const int c = shape.bond_types;
  GraphContext ctx { n, c, std::vector<double>(bonds_onehot.size(), 0.0) };
  for (int i = 0; i < n; ++i) {
    double deg = 0.0;
    for (int ch = 0; ch < c; ++ch) {
      for (int j = 0; j < n; ++j)
        deg += bonds_onehot[(ch * n + i) * n + j];
    }
    for (int ch = 0; ch < c; ++ch) {
      for (int j = 0; j < n; ++j) {
        const std::size_t k = (ch * n + i) * n + j;
        ctx.adj[k] = bonds_onehot[k] / (1.0 + deg);
      }
    }
  }
  return ctx;
}

// ---------------------------------------------------------------------------
// GraphConditioner

GraphConditioner::GraphConditioner(ParamStore &store, const std::string &prefix,
                                   const GraphShape &shape, int width,
                                   int out_cols, Rng &rng)
    : shape_(shape), width_(width), out_cols_(out_cols) {
  if (width < 1 || out_cols < 1)
    throw Error(Errc::kShape, "graph conditioner needs positive widths");
  const auto c = static_cast<std::size_t>(shape.bond_types);
  const auto k = static_cast<std::size_t>(shape.num_types);
  const auto h = static_cast<std::size_t>(width);
  const auto o = static_cast<std::size_t>(out_cols);
  w1_rel_ = store.add(prefix + ".w1_rel", { c, k, h });
  w1_self_ = store.add(prefix + ".w1_self", { k, h });
  b1_ = store.add(prefix + ".b1", { h });
  w2_rel_ = store.add(prefix + ".w2_rel", { c, h, o });
  w2_self_ = store.add(prefix + ".w2_self", { h, o });
  b2_ = store.add(prefix + ".b2", { o });

  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(double(k)));
  for (double &v: store.values(w1_rel_))
    v = normal(rng);
  for (double &v: store.values(w1_self_))
    v = normal(rng);
}

void GraphConditioner::check_context(const GraphContext &ctx) const {
  if (ctx.atoms != shape_.max_atoms || ctx.channels != shape_.bond_types
      || static_cast<int>(ctx.adj.size()) != shape_.bond_dim())
    throw Error(Errc::kShape, "graph context does not match the conditioner");
}

void GraphConditioner::forward(std::span<const double> theta,
                               const GraphContext &ctx,
                               std::span<const double> h0,
                               std::span<double> out,
                               std::vector<double> *h1_out) const {
  check_context(ctx);
  const int n = shape_.max_atoms;
  const int k = shape_.num_types;
  const int c = shape_.bond_types;
  check_size(h0.size(), n * k, "conditioner input");
  check_size(out.size(), n * out_cols_, "conditioner output");

  const CMap x(h0.data(), n, k);
  const auto w1r = w1_rel_.of(theta);
  const auto w2r = w2_rel_.of(theta);

  RowMatrix pre = x * CMap(w1_self_.of(theta).data(), k, width_);
  pre.rowwise() += CRow(b1_.of(theta).data(), width_);
  for (int ch = 0; ch < c; ++ch) {
    const CMap a(ctx.adj.data() + ch * n * n, n, n);
    const CMap w(w1r.data() + ch * k * width_, k, width_);
    pre.noalias() += a * (x * w);
  }
  const RowMatrix h1 = pre.array().tanh().matrix();

  MMap o(out.data(), n, out_cols_);
  o = h1 * CMap(w2_self_.of(theta).data(), width_, out_cols_);
  o.rowwise() += CRow(b2_.of(theta).data(), out_cols_);
  for (int ch = 0; ch < c; ++ch) {
    const CMap a(ctx.adj.data() + ch * n * n, n, n);
    const CMap w(w2r.data() + ch * width_ * out_cols_, width_, out_cols_);
    o.noalias() += a * (h1 * w);
  }
  if (h1_out != nullptr)
    h1_out->assign(h1.data(), h1.data() + h1.size());
}

void GraphConditioner::backward(std::span<const double> theta,
                                const GraphContext &ctx,
                                std::span<const double> h0,
                                std::span<const double> h1s,
                                std::span<const double> dout,
                                std::span<double> dh0,
                                std::span<double> grad) const {
  check_context(ctx);
  const int n = shape_.max_atoms;
  const int k = shape_.num_types;
  const int c = shape_.bond_types;
  check_size(h0.size(), n * k, "conditioner input");
  check_size(h1s.size(), n * width_, "conditioner hidden state");
  check_size(dout.size(), n * out_cols_, "conditioner output gradient");
  check_size(dh0.size(), n * k, "conditioner input gradient");

  const CMap x(h0.data(), n, k);
  const CMap h1(h1s.data(), n, width_);
  const CMap g(dout.data(), n, out_cols_);
  const auto w1r = w1_rel_.of(theta);
  const auto w2r = w2_rel_.of(theta);
  auto gw1r = w1_rel_.of(grad);
  auto gw2r = w2_rel_.of(grad);

  // Output layer.
  MRow(b2_.of(grad).data(), out_cols_) += g.colwise().sum();
  const CMap w2s(w2_self_.of(theta).data(), width_, out_cols_);
  MMap(w2_self_.of(grad).data(), width_, out_cols_).noalias() +=
      h1.transpose() * g;
  RowMatrix dh1 = g * w2s.transpose();
  for (int ch = 0; ch < c; ++ch) {
    const CMap a(ctx.adj.data() + ch * n * n, n, n);
    const CMap w(w2r.data() + ch * width_ * out_cols_, width_, out_cols_);
    const RowMatrix ag = a.transpose() * g;  // dL/d(H1 W2_c)
    MMap(gw2r.data() + ch * width_ * out_cols_, width_, out_cols_).noalias() +=
        h1.transpose() * ag;
    dh1.noalias() += ag * w.transpose();
  }

  // Hidden layer.
  const RowMatrix dpre =
      (dh1.array() * (1.0 - h1.array().square())).matrix();
  MRow(b1_.of(grad).data(), width_) += dpre.colwise().sum();
  const CMap w1s(w1_self_.of(theta).data(), k, width_);
  MMap(w1_self_.of(grad).data(), k, width_).noalias() += x.transpose() * dpre;
  MMap dx(dh0.data(), n, k);
  dx = dpre * w1s.transpose();
  for (int ch = 0; ch < c; ++ch) {
    const CMap a(ctx.adj.data() + ch * n * n, n, n);
    const CMap w(w1r.data() + ch * k * width_, k, width_);
    const RowMatrix ad = a.transpose() * dpre;
    MMap(gw1r.data() + ch * k * width_, k, width_).noalias() +=
        x.transpose() * ad;
    dx.noalias() += ad * w.transpose();
  }
}

// ---------------------------------------------------------------------------
// GraphCoupling

GraphCoupling::GraphCoupling(ParamStore &store, const std::string &prefix,
                             const GraphShape &shape, int parity, int width,
                             Rng &rng)
    : shape_(shape), parity_(parity & 1),
      cond_(store, prefix, shape, width, 2 * shape.num_types, rng) { }

void GraphCoupling::check_dim(std::size_t n) const {
  check_size(n, static_cast<std::size_t>(dim()), "graph coupling");
}

std::vector<double> GraphCoupling::masked(std::span<const double> x) const {
  const int k = shape_.num_types;
  std::vector<double> h0(x.begin(), x.end());
  for (int i = 0; i < shape_.max_atoms; ++i) {
    if (transformed(i))
      std::fill_n(h0.begin() + i * k, k, 0.0);
  }
  return h0;
}

double GraphCoupling::forward(std::span<const double> theta,
                              const GraphContext &ctx,
                              std::span<const double> x, std::span<double> y,
                              Cache *cache) const {
  check_dim(x.size());
  check_dim(y.size());
  const int n = shape_.max_atoms;
  const int k = shape_.num_types;
  std::vector<double> h0 = masked(x);
  std::vector<double> out(static_cast<std::size_t>(n) * 2 * k);
  std::vector<double> h1;
  cond_.forward(theta, ctx, h0, out, &h1);

  std::copy(x.begin(), x.end(), y.begin());
  std::vector<double> sig(x.size(), 0.0);
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!transformed(i))
      continue;
    for (int t = 0; t < k; ++t) {
      const double s = out[i * 2 * k + t];
      const double shift = out[i * 2 * k + k + t];
      sig[i * k + t] = sigmoid(s);
      y[i * k + t] = x[i * k + t] * sig[i * k + t] + shift;
      logdet += log_sigmoid(s);
    }
  }
  if (cache != nullptr) {
    cache->filled = true;
    cache->x.assign(x.begin(), x.end());
    cache->h0 = std::move(h0);
    cache->h1 = std::move(h1);
    cache->sig = std::move(sig);
  }
  return logdet;
}

double GraphCoupling::inverse(std::span<const double> theta,
                              const GraphContext &ctx,
                              std::span<const double> y,
                              std::span<double> x) const {
  check_dim(y.size());
  check_dim(x.size());
  const int n = shape_.max_atoms;
  const int k = shape_.num_types;
  const std::vector<double> h0 = masked(y);
  std::vector<double> out(static_cast<std::size_t>(n) * 2 * k);
  cond_.forward(theta, ctx, h0, out);

  std::copy(y.begin(), y.end(), x.begin());
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!transformed(i))
      continue;
    for (int t = 0; t < k; ++t) {
      const double s = out[i * 2 * k + t];
      const double shift = out[i * 2 * k + k + t];
      x[i * k + t] = (y[i * k + t] - shift) / sigmoid(s);
      logdet -= log_sigmoid(s);
    }
  }
  return logdet;
}

void GraphCoupling::backward(std::span<const double> theta,
                             const GraphContext &ctx, const Cache &cache,
                             std::span<const double> dy, double dlogdet,
                             std::span<double> dx,
                             std::span<double> grad) const {
  if (!cache.filled)
    throw Error(Errc::kNoCache, "graph coupling backward without a cache");
  check_dim(dy.size());
  check_dim(dx.size());
  const int n = shape_.max_atoms;
  const int k = shape_.num_types;

  std::vector<double> dout(static_cast<std::size_t>(n) * 2 * k, 0.0);
  for (int i = 0; i < n; ++i) {
    if (!transformed(i))
      continue;
    for (int t = 0; t < k; ++t) {
      const double sg = cache.sig[i * k + t];
      const double d = dy[i * k + t];
      dout[i * 2 * k + t] =
          d * cache.x[i * k + t] * sg * (1.0 - sg) + dlogdet * (1.0 - sg);
      dout[i * 2 * k + k + t] = d;
    }
  }

  std::vector<double> dh0(static_cast<std::size_t>(n) * k);
  cond_.backward(theta, ctx, cache.h0, cache.h1, dout, dh0, grad);

  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < k; ++t) {
      const int idx = i * k + t;
      dx[idx] = transformed(i) ? dy[idx] * cache.sig[idx] : dy[idx] + dh0[idx];
    }
  }
}

}  // namespace tflow
