//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_SAMPLER_SAMPLER_H_
#define TFLOW_SAMPLER_SAMPLER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tflow/flow/flows.h"
#include "tflow/molio/molgraph.h"
#include "tflow/trainer/model.h"

namespace tflow {

struct GenerationRequest {
  std::string sequence;
  int n = 1;
  std::optional<double> lambda;  // defaults to the model's trained lambda
  std::uint64_t seed = 0;
  bool correct = true;
};

struct GeneratedMolecule {
  MolGraph raw;    // straight out of the inverse flows
  MolGraph graph;  // after validity correction (== raw when disabled)
  bool raw_valid = false;
};

// Inverse path for one latent vector (atom block first): bonds are decoded,
// discretized into the conditioning tensor, then atoms are decoded given it.
// When no slot reaches the occupancy threshold the highest-scoring slot is
// kept so the result is never empty. E_UNTRAINED if actnorm was never
// initialized.
MolGraph decode_latent(const Model &model, std::span<const double> z);

// Forward path on the noise-free one-hot tensors.
LatentPair encode_molecule(const Model &model, const MolGraph &graph);

// n samples from the space around the target's embedding. E_UNTRAINED,
// E_ALPHABET, E_RANGE for n < 1.
std::vector<GeneratedMolecule> generate(const Model &model,
                                        const GenerationRequest &request);

// Repeatedly lowers the highest-order bond (lowest neighbor index on ties) at
// the atom with the largest valence excess (lowest index on ties) until no
// atom exceeds its valence, then keeps the largest connected component
// (lowest member index on ties). Slot indices are preserved.
MolGraph validity_correction(const MolGraph &graph, const Vocabulary &vocab);

}  // namespace tflow

#endif  // TFLOW_SAMPLER_SAMPLER_H_
