//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_FLOW_GRAPH_H_
#define TFLOW_FLOW_GRAPH_H_

#include <span>
#include <string>
#include <vector>

#include "tflow/flow/params.h"
#include "tflow/molio/molgraph.h"
#include "tflow/rng.h"

namespace tflow {

// Degree-normalized adjacency per bond channel:
// adj[c][i][j] = B[c,i,j] / (1 + deg_i), deg_i the number of bonds at slot i.
// Rows therefore sum to at most 1 (the implicit self loop takes the rest).
struct GraphContext {
  int atoms = 0;
  int channels = 0;
  std::vector<double> adj;  // C x N x N

  static GraphContext from_bonds(std::span<const double> bonds_onehot,
                                 const GraphShape &shape);
};

// Two relational graph-convolution layers over an N x K atom matrix:
//
//   H1  = tanh(sum_c adj_c H0 W1_c + H0 W1_self + b1)      N x width
//   out = sum_c adj_c H1 W2_c + H1 W2_self + b2            N x out_cols
//
// The output layer starts at zero.
class GraphConditioner {
public:
  GraphConditioner() = default;
  GraphConditioner(ParamStore &store, const std::string &prefix,
                   const GraphShape &shape, int width, int out_cols, Rng &rng);

  int width() const { return width_; }
  int out_cols() const { return out_cols_; }

  // out is N x out_cols; h1 (optional) receives the hidden activations.
  void forward(std::span<const double> theta, const GraphContext &ctx,
               std::span<const double> h0, std::span<double> out,
               std::vector<double> *h1 = nullptr) const;
  // Accumulates parameter gradients and writes dL/dH0.
  void backward(std::span<const double> theta, const GraphContext &ctx,
                std::span<const double> h0, std::span<const double> h1,
                std::span<const double> dout, std::span<double> dh0,
                std::span<double> grad) const;

  ParamRef w1_rel_ref() const { return w1_rel_; }
  ParamRef w1_self_ref() const { return w1_self_; }
  ParamRef b1_ref() const { return b1_; }
  ParamRef w2_rel_ref() const { return w2_rel_; }
  ParamRef w2_self_ref() const { return w2_self_; }
  ParamRef b2_ref() const { return b2_; }

private:
  void check_context(const GraphContext &ctx) const;

  GraphShape shape_;
  int width_ = 0;
  int out_cols_ = 0;
  ParamRef w1_rel_;   // C x K x width
  ParamRef w1_self_;  // K x width
  ParamRef b1_;       // width
  ParamRef w2_rel_;   // C x width x out_cols
  ParamRef w2_self_;  // width x out_cols
  ParamRef b2_;       // out_cols
};

// Sigmoid affine coupling over atom rows. Rows with i % 2 == parity are
// transformed; the remaining rows pass through and, together with the bond
// context, drive a GraphConditioner emitting K scale logits and K shifts per
// row.
class GraphCoupling {
public:
  struct Cache {
    bool filled = false;
    std::vector<double> x;
    std::vector<double> h0;   // masked conditioner input
    std::vector<double> h1;   // conditioner hidden activations
    std::vector<double> sig;  // sigmoid(s), N x K (unused rows are 0)
  };

  GraphCoupling() = default;
  GraphCoupling(ParamStore &store, const std::string &prefix,
                const GraphShape &shape, int parity, int width, Rng &rng);

  int dim() const { return shape_.atom_dim(); }
  int parity() const { return parity_; }
  bool transformed(int row) const { return row % 2 == parity_; }
  const GraphConditioner &conditioner() const { return cond_; }

  double forward(std::span<const double> theta, const GraphContext &ctx,
                 std::span<const double> x, std::span<double> y,
                 Cache *cache = nullptr) const;
  double inverse(std::span<const double> theta, const GraphContext &ctx,
                 std::span<const double> y, std::span<double> x) const;
  void backward(std::span<const double> theta, const GraphContext &ctx,
                const Cache &cache, std::span<const double> dy, double dlogdet,
                std::span<double> dx, std::span<double> grad) const;

private:
  std::vector<double> masked(std::span<const double> x) const;
  void check_dim(std::size_t n) const;

  GraphShape shape_;
  int parity_ = 0;
  GraphConditioner cond_;
};

}  // namespace tflow

#endif  // TFLOW_FLOW_GRAPH_H_
