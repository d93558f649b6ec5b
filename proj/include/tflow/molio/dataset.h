//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_MOLIO_DATASET_H_
#define TFLOW_MOLIO_DATASET_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tflow/molio/molgraph.h"

namespace tflow {

enum class Split {
  kTrain,
  kValid,
  kTest,
};

std::string_view split_name(Split split);

// Split of a target, from a stable hash of its sequence modulo 10:
// 0-7 train, 8 valid, 9 test. All rows of one target share a split.
Split split_for_sequence(std::string_view sequence);

struct PairRecord {
  std::string target_id;
  std::string sequence;
  std::string smiles;
  MolGraph graph;
  Split split = Split::kTrain;
  int line = 0;
};

struct PairDataset {
  std::vector<PairRecord> records;

  std::vector<std::size_t> indices(Split split) const;
  std::vector<PairRecord> subset(Split split) const;
  // Distinct target ids in first-appearance order.
  std::vector<std::string> target_ids() const;
};

// Three tab-separated columns per line: target_id, amino-acid sequence,
// SMILES. Blank lines and lines starting with '#' are skipped.
// Errors: E_IO, E_FORMAT (column count, bad residue letters, a target id with
// two different sequences), SMILES errors re-thrown with the line number.
PairDataset load_pairs(const std::filesystem::path &path,
                       const GraphShape &shape, const Vocabulary &vocab);
PairDataset read_pairs(std::istream &is, const GraphShape &shape,
                       const Vocabulary &vocab);

void write_pairs(std::ostream &os, const PairDataset &dataset);

bool is_amino_acid_sequence(std::string_view sequence);

}  // namespace tflow

#endif  // TFLOW_MOLIO_DATASET_H_
