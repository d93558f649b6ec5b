//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_MOLIO_SMILES_H_
#define TFLOW_MOLIO_SMILES_H_

#include <string>
#include <string_view>

#include "tflow/molio/molgraph.h"

namespace tflow {

// Kekulized, uncharged SMILES subset: organic-subset atoms (Cl/Br read
// greedily), bracket atoms holding a bare element symbol, bonds - = #,
// branches and ring-closure digits 1-9. Hydrogens stay implicit.
//
// Throws Error with E_SYNTAX, E_VOCAB, E_AROMATIC or E_TOO_LARGE; never
// anything else, for any input bytes.
MolGraph parse_smiles(std::string_view smiles, const GraphShape &shape,
                      const Vocabulary &vocab);

// Depth-first writer rooted at the lowest occupied slot. Requires a connected
// graph (E_DISCONNECTED otherwise, E_EMPTY for a graph without atoms).
std::string write_smiles(const MolGraph &graph, const Vocabulary &vocab);

}  // namespace tflow

#endif  // TFLOW_MOLIO_SMILES_H_
