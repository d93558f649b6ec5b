//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_FLOW_FLOWS_H_
#define TFLOW_FLOW_FLOWS_H_

#include <span>
#include <string>
#include <vector>

#include "tflow/flow/graph.h"
#include "tflow/flow/layers.h"
#include "tflow/flow/params.h"
#include "tflow/molio/molgraph.h"
#include "tflow/rng.h"

namespace tflow {

struct FlowConfig {
  GraphShape shape;
  int bond_blocks = 4;   // actnorm -> mixer -> coupling blocks
  int atom_blocks = 4;   // graph couplings
  int bond_hidden = 64;  // bond conditioner width
  int atom_hidden = 32;  // graph conditioner width
};

// Bond latent and atom latent of one molecule. The concatenated embedding
// puts the atom block first.
struct LatentPair {
  std::vector<double> atoms;  // N * K
  std::vector<double> bonds;  // C * N * N

  std::vector<double> concat() const;
  static LatentPair split(std::span<const double> z, const GraphShape &shape);
};

// Glow-style flow on the C x N x N bond tensor. Block q's coupling keeps the
// entries with (c + i + j + q) even and transforms the rest.
class BondFlow {
public:
  struct Cache {
    std::vector<Actnorm::Cache> norm;
    std::vector<ChannelMixer::Cache> mix;
    std::vector<AffineCoupling::Cache> couple;
  };

  BondFlow() = default;
  BondFlow(ParamStore &store, const std::string &prefix,
           const GraphShape &shape, int blocks, int hidden, Rng &rng);

  int blocks() const { return static_cast<int>(norm_.size()); }
  int dim() const { return shape_.bond_dim(); }
  const Actnorm &actnorm(int q) const { return norm_[q]; }
  const ChannelMixer &mixer(int q) const { return mix_[q]; }
  const AffineCoupling &coupling(int q) const { return couple_[q]; }

  bool initialized(std::span<const double> theta) const;
  // Data-dependent actnorm initialization, block by block, on a batch of
  // dequantized bond tensors.
  void initialize(std::span<double> theta,
                  const std::vector<std::vector<double>> &batch) const;

  double forward(std::span<const double> theta, std::span<const double> x,
                 std::span<double> z, Cache *cache = nullptr) const;
  double inverse(std::span<const double> theta, std::span<const double> z,
                 std::span<double> x) const;
  void backward(std::span<const double> theta, const Cache &cache,
                std::span<const double> dz, double dlogdet,
                std::span<double> dx, std::span<double> grad) const;

private:
  GraphShape shape_;
  std::vector<Actnorm> norm_;
  std::vector<ChannelMixer> mix_;
  std::vector<AffineCoupling> couple_;
};

// Stack of graph couplings on the N x K atom matrix, conditioned on a fixed
// bond tensor; block q transforms the rows with i % 2 == q % 2.
class AtomFlow {
public:
  struct Cache {
    std::vector<GraphCoupling::Cache> couple;
  };

  AtomFlow() = default;
  AtomFlow(ParamStore &store, const std::string &prefix,
           const GraphShape &shape, int blocks, int hidden, Rng &rng);

  int blocks() const { return static_cast<int>(couple_.size()); }
  int dim() const { return shape_.atom_dim(); }
  const GraphCoupling &coupling(int q) const { return couple_[q]; }

  double forward(std::span<const double> theta, const GraphContext &ctx,
                 std::span<const double> x, std::span<double> z,
                 Cache *cache = nullptr) const;
  double inverse(std::span<const double> theta, const GraphContext &ctx,
                 std::span<const double> z, std::span<double> x) const;
  void backward(std::span<const double> theta, const GraphContext &ctx,
                const Cache &cache, std::span<const double> dz,
                double dlogdet, std::span<double> dx,
                std::span<double> grad) const;

private:
  GraphShape shape_;
  std::vector<GraphCoupling> couple_;
};

// The pair of flows mapping a dequantized molecule to its latent embedding.
class MolecularFlow {
public:
  struct Cache {
    BondFlow::Cache bond;
    AtomFlow::Cache atom;
    GraphContext ctx;
  };

  MolecularFlow() = default;
  MolecularFlow(ParamStore &store, const FlowConfig &config, Rng &rng);

  const FlowConfig &config() const { return config_; }
  const GraphShape &shape() const { return config_.shape; }
  const BondFlow &bond_flow() const { return bond_; }
  const AtomFlow &atom_flow() const { return atom_; }

  // atoms/bonds are the dequantized tensors; bonds_onehot is the noise-free
  // bond tensor the atom flow conditions on. Returns the summed log-det.
  double forward(std::span<const double> theta, std::span<const double> atoms,
                 std::span<const double> bonds,
                 std::span<const double> bonds_onehot, LatentPair &z,
                 Cache *cache = nullptr) const;
  // Gradients w.r.t. the latents (and the log-det) into parameter grads.
  void backward(std::span<const double> theta, const Cache &cache,
                const LatentPair &dz, double dlogdet,
                std::span<double> grad) const;

private:
  FlowConfig config_;
  BondFlow bond_;
  AtomFlow atom_;
};

}  // namespace tflow

#endif  // TFLOW_FLOW_FLOWS_H_
