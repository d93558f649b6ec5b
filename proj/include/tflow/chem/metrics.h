//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_CHEM_METRICS_H_
#define TFLOW_CHEM_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tflow/chem/chem.h"
#include "tflow/molio/molgraph.h"

namespace tflow {

struct MetricsOptions {
  int fingerprint_radius = kDefaultFingerprintRadius;
  int fingerprint_width = kDefaultFingerprintWidth;
};

struct MoleculeRow {
  std::size_t index = 0;
  std::string smiles;  // empty when the graph cannot be written
  bool valid = false;
  bool duplicate = false;  // an earlier valid molecule has the same hash
  bool novel = false;
  std::uint64_t hash = 0;
  std::optional<double> nn_tanimoto;  // percent, valid molecules only
};

// All percentages lie in [0, 100]; uniqueness and novelty are relative to the
// valid molecules.
struct MetricsReport {
  std::size_t total = 0;
  std::size_t valid = 0;
  std::size_t unique = 0;
  std::size_t novel = 0;
  double validity = 0.0;
  double uniqueness = 0.0;
  double novelty = 0.0;
  double nn_tanimoto = 0.0;
  std::vector<MoleculeRow> rows;
};

// E_EMPTY_TRAIN when train_set is empty.
MetricsReport evaluate(const std::vector<MolGraph> &generated,
                       const std::vector<MolGraph> &train_set,
                       const Vocabulary &vocab,
                       const MetricsOptions &options = {});

nlohmann::json to_json(const MetricsReport &report);

// index,smiles,valid,duplicate,novel,hash,nn_tanimoto
void write_rows_csv(std::ostream &os, const MetricsReport &report);

}  // namespace tflow

#endif  // TFLOW_CHEM_METRICS_H_
