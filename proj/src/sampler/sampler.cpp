//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/sampler/sampler.h"

#include <algorithm>

#include "tflow/chem/chem.h"
#include "tflow/error.h"
#include "tflow/molio/dequant.h"
#include "tflow/objectives/losses.h"
#include "tflow/rng.h"

namespace tflow {

MolGraph decode_latent(const Model &model, std::span<const double> z) {
  if (!model.initialized())
    throw Error(Errc::kUntrained, "model has uninitialized actnorm layers");
  const GraphShape &shape = model.shape();
  const LatentPair lp = LatentPair::split(z, shape);
  const auto theta = model.theta();

  ContinuousGraph x { shape, std::vector<double>(shape.atom_dim()),
                      std::vector<double>(shape.bond_dim()) };
  model.flow().bond_flow().inverse(theta, lp.bonds, x.bonds);
  const std::vector<double> b = discretize_bonds(x.bonds, shape);
  const GraphContext ctx = GraphContext::from_bonds(b, shape);
  model.flow().atom_flow().inverse(theta, ctx, lp.atoms, x.atoms);

  MolGraph g = discretize(x);
  if (g.n_heavy() == 0) {
    const auto best = std::max_element(x.atoms.begin(), x.atoms.end());
    const auto idx = static_cast<int>(best - x.atoms.begin());
    g.set_atom(idx / shape.num_types, idx % shape.num_types);
  }
  return g;
}

LatentPair encode_molecule(const Model &model, const MolGraph &graph) {
  LatentPair z;
  const std::vector<double> bonds = graph.bonds_onehot();
  model.flow().forward(model.theta(), graph.atoms_onehot(), bonds, bonds, z);
  return z;
}

std::vector<GeneratedMolecule> generate(const Model &model,
                                        const GenerationRequest &request) {
  if (request.n < 1)
    throw Error(Errc::kRange, "sample count must be at least 1");
  if (!model.initialized())
    throw Error(Errc::kUntrained, "model has uninitialized actnorm layers");
  const TargetEmbedding target =
      model.encoder().encode_target(model.theta(), request.sequence);
  const double lambda = request.lambda.value_or(model.space_lambda());
  const Vocabulary &vocab = model.config().vocab;

  Rng rng(request.seed);
  std::vector<GeneratedMolecule> out;
  for (int s = 0; s < request.n; ++s) {
    const std::vector<double> z =
        sample_space(target.z, model.space_sigma(), lambda, rng);
    GeneratedMolecule m { decode_latent(model, z), MolGraph(model.shape()),
                          false };
    m.raw_valid = check_valence(m.raw, vocab);
    m.graph = request.correct ? validity_correction(m.raw, vocab) : m.raw;
    out.push_back(std::move(m));
  }
  return out;
}

MolGraph validity_correction(const MolGraph &graph, const Vocabulary &vocab) {
  MolGraph g = graph;
  const int n = g.max_atoms();
  for (;;) {
    int worst = -1;
    int worst_excess = 0;
    for (int i = 0; i < n; ++i) {
      if (!g.occupied(i))
        continue;
      const int excess = g.bond_order_sum(i) - vocab.max_valence(g.atom(i));
      if (excess > worst_excess) {
        worst_excess = excess;
        worst = i;
      }
    }
    if (worst < 0)
      break;
    int partner = -1;
    for (int j = 0; j < n; ++j) {
      if (g.bond(worst, j) > 0
          && (partner < 0 || g.bond(worst, j) > g.bond(worst, partner)))
        partner = j;
    }
    g.set_bond(worst, partner, g.bond(worst, partner) - 1);
  }

  const auto comps = g.components();
  if (comps.size() > 1) {
    std::size_t keep = 0;
    for (std::size_t c = 1; c < comps.size(); ++c) {
      if (comps[c].size() > comps[keep].size())
        keep = c;
    }
    for (std::size_t c = 0; c < comps.size(); ++c) {
      if (c == keep)
        continue;
      for (const int i: comps[c])
        g.set_atom(i, -1);
    }
  }
  return g;
}

}  // namespace tflow
