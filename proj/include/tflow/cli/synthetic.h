//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_CLI_SYNTHETIC_H_
#define TFLOW_CLI_SYNTHETIC_H_

#include <cstdint>

#include "tflow/molio/dataset.h"
#include "tflow/molio/molgraph.h"
#include "tflow/rng.h"

namespace tflow {

struct SyntheticOptions {
  int pairs = 64;
  int multiplicity = 4;     // drugs per target
  int sequence_length = 60;
  int min_atoms = 3;
  std::uint64_t seed = 0;
};

// Random connected, valence-feasible molecule with between min_atoms and
// shape.max_atoms heavy atoms (rejection sampling against check_valence).
MolGraph random_molecule(Rng &rng, const GraphShape &shape,
                         const Vocabulary &vocab, int min_atoms = 1);

// Deterministic surrogate dataset: ceil(pairs / multiplicity) random
// sequences, each paired with `multiplicity` distinct random molecules
// (the last target may get fewer). Molecules are distinct across the set.
PairDataset make_synthetic(const SyntheticOptions &options,
                           const GraphShape &shape, const Vocabulary &vocab);

}  // namespace tflow

#endif  // TFLOW_CLI_SYNTHETIC_H_
