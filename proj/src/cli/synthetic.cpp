//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/cli/synthetic.h"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>
#include <string>

#include "tflow/chem/chem.h"
#include "tflow/error.h"
#include "tflow/molio/smiles.h"
#include "tflow/targetenc/encoder.h"

namespace tflow {
namespace {

// Element draw weights, drug-like: mostly carbon with some heteroatoms.
double element_weight(const std::string &symbol) {
  if (symbol == "C")
    return 60.0;
  if (symbol == "N" || symbol == "O")
    return 12.0;
  if (symbol == "F" || symbol == "S" || symbol == "Cl")
    return 4.0;
  return 1.0;
}

}  // namespace

MolGraph random_molecule(Rng &rng, const GraphShape &shape,
                         const Vocabulary &vocab, int min_atoms) {
  const int lo = std::clamp(min_atoms, 1, shape.max_atoms);
  std::uniform_int_distribution<int> atoms_dist(lo, shape.max_atoms);
  std::vector<double> weights;
  for (int t = 0; t < vocab.size(); ++t)
    weights.push_back(element_weight(vocab[t].symbol));
  std::discrete_distribution<int> type_dist(weights.begin(), weights.end());
  std::discrete_distribution<int> order_dist({ 0.0, 0.75, 0.2, 0.05 });
  std::bernoulli_distribution ring(0.3);

  for (;;) {
    MolGraph g(shape);
    const int n = atoms_dist(rng);
    for (int i = 0; i < n; ++i)
      g.set_atom(i, type_dist(rng));
    for (int i = 1; i < n; ++i) {
      const int parent = std::uniform_int_distribution<int>(0, i - 1)(rng);
      g.set_bond(i, parent, std::min(order_dist(rng), shape.bond_types));
    }
    if (n >= 3 && ring(rng)) {
      const int a = std::uniform_int_distribution<int>(0, n - 1)(rng);
      const int b = std::uniform_int_distribution<int>(0, n - 1)(rng);
      if (a != b && g.bond(a, b) == 0)
        g.set_bond(a, b, 1);
    }
    if (check_valence(g, vocab))
      return g;
  }
}

PairDataset make_synthetic(const SyntheticOptions &options,
                           const GraphShape &shape, const Vocabulary &vocab) {
  if (options.pairs < 1 || options.multiplicity < 1
      || options.sequence_length < 1)
    throw Error(Errc::kRange, "synthetic dataset sizes must be positive");
  Rng rng(options.seed);
  std::uniform_int_distribution<int> residue(
      0, static_cast<int>(kAminoAcids.size()) - 1);
  std::set<std::uint64_t> seen;
  PairDataset data;
  const int targets =
      (options.pairs + options.multiplicity - 1) / options.multiplicity;
  int remaining = options.pairs;
  for (int t = 0; t < targets; ++t) {
    std::string seq;
    for (int i = 0; i < options.sequence_length; ++i)
      seq += kAminoAcids[residue(rng)];
    char id[32];
    std::snprintf(id, sizeof id, "T%04d", t + 1);
    for (int k = 0; k < options.multiplicity && remaining > 0; ++k) {
      MolGraph g = random_molecule(rng, shape, vocab, options.min_atoms);
      while (!seen.insert(canonical_hash(g)).second)
        g = random_molecule(rng, shape, vocab, options.min_atoms);
      PairRecord r;
      r.target_id = id;
      r.sequence = seq;
      r.smiles = write_smiles(g, vocab);
      // Slot order as a reader of the written file would see it.
      r.graph = parse_smiles(r.smiles, shape, vocab);
      r.split = split_for_sequence(seq);
      data.records.push_back(std::move(r));
      --remaining;
    }
  }
  return data;
}

}  // namespace tflow
