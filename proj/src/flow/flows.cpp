//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/flow/flows.h"

#include <algorithm>
#include <string>
#include <vector>

#include "tflow/error.h"

namespace tflow {

std::vector<double> LatentPair::concat() const {
  std::vector<double> z(atoms);
  z.insert(z.end(), bonds.begin(), bonds.end());
  return z;
}

LatentPair LatentPair::split(std::span<const double> z,
                             const GraphShape &shape) {
  if (static_cast<int>(z.size()) != shape.latent_dim())
    throw Error(Errc::kShape, "latent vector does not match the graph shape");
  const auto a = static_cast<std::size_t>(shape.atom_dim());
  return { { z.begin(), z.begin() + a }, { z.begin() + a, z.end() } };
}

// ---------------------------------------------------------------------------
// BondFlow

BondFlow::BondFlow(ParamStore &store, const std::string &prefix,
                   const GraphShape &shape, int blocks, int hidden, Rng &rng)
    : shape_(shape) {
  if (blocks < 0)
    throw Error(Errc::kShape, "negative block count");
  const int n = shape.max_atoms;
  const int c = shape.bond_types;
  for (int q = 0; q < blocks; ++q) {
    const std::string p = prefix + "." + std::to_string(q);
    norm_.emplace_back(store, p + ".actnorm", c, n * n);
    mix_.emplace_back(store, p + ".mixer", c, n * n, rng);
    std::vector<int> visible, hidden_idx;
    for (int ch = 0; ch < c; ++ch) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const int idx = (ch * n + i) * n + j;
          ((ch + i + j + q) % 2 == 0 ? visible : hidden_idx).push_back(idx);
        }
      }
    }
    couple_.emplace_back(store, p + ".coupling", std::move(visible),
                         std::move(hidden_idx), hidden, rng);
  }
}

bool BondFlow::initialized(std::span<const double> theta) const {
  return std::all_of(norm_.begin(), norm_.end(),
                     [&](const Actnorm &a) { return a.initialized(theta); });
}

void BondFlow::initialize(std::span<double> theta,
                          const std::vector<std::vector<double>> &batch) const {
  std::vector<std::vector<double>> cur = batch;
  std::vector<double> tmp(dim());
  for (int q = 0; q < blocks(); ++q) {
    norm_[q].initialize(theta, cur);
    for (auto &x: cur) {
      norm_[q].forward(theta, x, tmp);
      mix_[q].forward(theta, tmp, x);
      couple_[q].forward(theta, x, tmp);
      x = tmp;
    }
  }
}

double BondFlow::forward(std::span<const double> theta,
                         std::span<const double> x, std::span<double> z,
                         Cache *cache) const {
  if (static_cast<int>(x.size()) != dim()
      || static_cast<int>(z.size()) != dim())
    throw Error(Errc::kShape, "bond flow input does not match the shape");
  if (cache != nullptr) {
    cache->norm.assign(blocks(), {});
    cache->mix.assign(blocks(), {});
    cache->couple.assign(blocks(), {});
  }
  std::vector<double> a(x.begin(), x.end()), b(dim());
  double logdet = 0.0;
  for (int q = 0; q < blocks(); ++q) {
    logdet += norm_[q].forward(theta, a, b, cache ? &cache->norm[q] : nullptr);
    logdet += mix_[q].forward(theta, b, a, cache ? &cache->mix[q] : nullptr);
    logdet +=
        couple_[q].forward(theta, a, b, cache ? &cache->couple[q] : nullptr);
    std::swap(a, b);
  }
  std::copy(a.begin(), a.end(), z.begin());
  return logdet;
}

double BondFlow::inverse(std::span<const double> theta,
                         std::span<const double> z,
                         std::span<double> x) const {
  if (static_cast<int>(x.size()) != dim()
      || static_cast<int>(z.size()) != dim())
    throw Error(Errc::kShape, "bond flow input does not match the shape");
  std::vector<double> a(z.begin(), z.end()), b(dim());
  double logdet = 0.0;
  for (int q = blocks() - 1; q >= 0; --q) {
    logdet += couple_[q].inverse(theta, a, b);
    logdet += mix_[q].inverse(theta, b, a);
    logdet += norm_[q].inverse(theta, a, b);
    std::swap(a, b);
  }
  std::copy(a.begin(), a.end(), x.begin());
  return logdet;
}

void BondFlow::backward(std::span<const double> theta, const Cache &cache,
                        std::span<const double> dz, double dlogdet,
                        std::span<double> dx, std::span<double> grad) const {
  if (static_cast<int>(cache.couple.size()) != blocks())
    throw Error(Errc::kNoCache, "bond flow backward without a forward cache");
  std::vector<double> a(dz.begin(), dz.end()), b(dim());
  for (int q = blocks() - 1; q >= 0; --q) {
    couple_[q].backward(theta, cache.couple[q], a, dlogdet, b, grad);
    mix_[q].backward(theta, cache.mix[q], b, dlogdet, a, grad);
    norm_[q].backward(theta, cache.norm[q], a, dlogdet, b, grad);
    std::swap(a, b);
  }
  std::copy(a.begin(), a.end(), dx.begin());
}

// ---------------------------------------------------------------------------
// AtomFlow

AtomFlow::AtomFlow(ParamStore &store, const std::string &prefix,
                   const GraphShape &shape, int blocks, int hidden, Rng &rng)
    : shape_(shape) {
  if (blocks < 0)
    throw Error(Errc::kShape, "negative block count");
  for (int q = 0; q < blocks; ++q) {
    couple_.emplace_back(store, prefix + "." + std::to_string(q) + ".coupling",
                         shape, q % 2, hidden, rng);
  }
}

double AtomFlow::forward(std::span<const double> theta,
                         const GraphContext &ctx, std::span<const double> x,
                         std::span<double> z, Cache *cache) const {
  if (static_cast<int>(x.size()) != dim()
      || static_cast<int>(z.size()) != dim())
    throw Error(Errc::kShape, "atom flow input does not match the shape");
  if (cache != nullptr)
    cache->couple.assign(blocks(), {});
  std::vector<double> a(x.begin(), x.end()), b(dim());
  double logdet = 0.0;
  for (int q = 0; q < blocks(); ++q) {
    logdet += couple_[q].forward(theta, ctx, a, b,
                                 cache ? &cache->couple[q] : nullptr);
    std::swap(a, b);
  }
  std::copy(a.begin(), a.end(), z.begin());
  return logdet;
}

double AtomFlow::inverse(std::span<const double> theta,
                         const GraphContext &ctx, std::span<const double> z,
                         std::span<double> x) const {
  if (static_cast<int>(x.size()) != dim()
      || static_cast<int>(z.size()) != dim())
    throw Error(Errc::kShape, "atom flow input does not match the shape");
  std::vector<double> a(z.begin(), z.end()), b(dim());
  double logdet = 0.0;
  for (int q = blocks() - 1; q >= 0; --q) {
    logdet += couple_[q].inverse(theta, ctx, a, b);
    std::swap(a, b);
  }
  std::copy(a.begin(), a.end(), x.begin());
  return logdet;
}

void AtomFlow::backward(std::span<const double> theta, const GraphContext &ctx,
                        const Cache &cache, std::span<const double> dz,
                        double dlogdet, std::span<double> dx,
                        std::span<double> grad) const {
  if (static_cast<int>(cache.couple.size()) != blocks())
    throw Error(Errc::kNoCache, "atom flow backward without a forward cache");
  std::vector<double> a(dz.begin(), dz.end()), b(dim());
  for (int q = blocks() - 1; q >= 0; --q) {
    couple_[q].backward(theta, ctx, cache.couple[q], a, dlogdet, b, grad);
    std::swap(a, b);
  }
  std::copy(a.begin(), a.end(), dx.begin());
}

// ---------------------------------------------------------------------------
// MolecularFlow

MolecularFlow::MolecularFlow(ParamStore &store, const FlowConfig &config,
                             Rng &rng)
    : config_(config),
      bond_(store, "flow.bond", config.shape, config.bond_blocks,
            config.bond_hidden, rng),
      atom_(store, "flow.atom", config.shape, config.atom_blocks,
            config.atom_hidden, rng) { }

double MolecularFlow::forward(std::span<const double> theta,
                              std::span<const double> atoms,
                              std::span<const double> bonds,
                              std::span<const double> bonds_onehot,
                              LatentPair &z, Cache *cache) const {
  const GraphShape &s = config_.shape;
  z.atoms.assign(s.atom_dim(), 0.0);
  z.bonds.assign(s.bond_dim(), 0.0);
  GraphContext ctx = GraphContext::from_bonds(bonds_onehot, s);
  double logdet =
      bond_.forward(theta, bonds, z.bonds, cache ? &cache->bond : nullptr);
  logdet += atom_.forward(theta, ctx, atoms, z.atoms,
                          cache ? &cache->atom : nullptr);
  if (cache != nullptr)
    cache->ctx = std::move(ctx);
  return logdet;
}

void MolecularFlow::backward(std::span<const double> theta, const Cache &cache,
                             const LatentPair &dz, double dlogdet,
                             std::span<double> grad) const {
  const GraphShape &s = config_.shape;
  std::vector<double> dbonds(s.bond_dim()), datoms(s.atom_dim());
  bond_.backward(theta, cache.bond, dz.bonds, dlogdet, dbonds, grad);
  atom_.backward(theta, cache.ctx, cache.atom, dz.atoms, dlogdet, datoms, grad);
}

}  // namespace tflow
