//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_TESTS_SUPPORT_FIXTURES_H_
#define TFLOW_TESTS_SUPPORT_FIXTURES_H_

#include <numeric>
#include <random>
#include <vector>

#include "tflow/cli/synthetic.h"
#include "tflow/molio/dequant.h"
#include "tflow/trainer/model.h"
#include "tflow/trainer/trainer.h"

namespace tflow::fixture {

// Three slots, two atom types, two bond channels, small widths.
inline ModelConfig tiny_model_config(bool trainable_encoder = true) {
  ModelConfig m;
  m.vocab = Vocabulary({ { "C", 4 }, { "N", 3 } });
  m.flow.shape = { 3, 2, 2 };
  m.flow.bond_blocks = 1;
  m.flow.atom_blocks = 2;
  m.flow.bond_hidden = 4;
  m.flow.atom_hidden = 3;
  m.encoder.k = 1;
  m.encoder.hidden = 4;
  m.encoder.trainable = trainable_encoder;
  m.encoder.out_dim = m.flow.shape.latent_dim();
  return m;
}

inline PairDataset tiny_dataset(const Model &model, int pairs = 8,
                                std::uint64_t seed = 0) {
  SyntheticOptions so;
  so.pairs = pairs;
  so.multiplicity = 2;
  so.sequence_length = 12;
  so.min_atoms = 1;
  so.seed = seed;
  return make_synthetic(so, model.shape(), model.config().vocab);
}

inline std::vector<int> all_indices(const TrainingSet &set) {
  std::vector<int> v(set.size());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Initializes actnorm from dequantized bonds of the whole set and perturbs
// every trainable parameter, so no layer sits at its identity start.
inline void warm_up(Model &model, const TrainingSet &set, Rng &rng,
                    double jitter = 0.1) {
  std::vector<std::vector<double>> bonds;
  for (const MolGraph &g: set.graphs)
    bonds.push_back(dequantize(g, 0.4, rng).bonds);
  model.flow().bond_flow().initialize(model.theta(), bonds);
  std::normal_distribution<double> normal(0.0, jitter);
  for (const auto &e: model.params().entries()) {
    if (!e.trainable)
      continue;
    for (double &v: e.ref.of(model.theta()))
      v += normal(rng);
  }
}

}  // namespace tflow::fixture

#endif  // TFLOW_TESTS_SUPPORT_FIXTURES_H_
