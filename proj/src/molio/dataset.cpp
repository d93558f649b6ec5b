//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/molio/dataset.h"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "tflow/error.h"
#include "tflow/molio/smiles.h"
#include "tflow/rng.h"

namespace tflow {

std::string_view split_name(Split split) {
  switch (split) {
  case Split::kTrain:
    return "train";
  case Split::kValid:
    return "valid";
  case Split::kTest:
    return "test";
  }
  return "train";
}

Split split_for_sequence(std::string_view sequence) {
  const std::uint64_t bucket = fnv1a64(sequence) % 10;
  if (bucket < 8)
    return Split::kTrain;
  return bucket == 8 ? Split::kValid : Split::kTest;
}

bool is_amino_acid_sequence(std::string_view sequence) {
  constexpr std::string_view kAlphabet = "ACDEFGHIKLMNPQRSTVWY";
  for (const char c: sequence) {
    if (kAlphabet.find(c) == std::string_view::npos)
      return false;
  }
  return true;
}

std::vector<std::size_t> PairDataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == split)
      out.push_back(i);
  }
  return out;
}

std::vector<PairRecord> PairDataset::subset(Split split) const {
  std::vector<PairRecord> out;
  for (const PairRecord &r: records) {
    if (r.split == split)
      out.push_back(r);
  }
  return out;
}

std::vector<std::string> PairDataset::target_ids() const {
  std::vector<std::string> ids;
  std::map<std::string, bool, std::less<>> seen;
  for (const PairRecord &r: records) {
    if (seen.emplace(r.target_id, true).second)
      ids.push_back(r.target_id);
  }
  return ids;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

}  // namespace

PairDataset read_pairs(std::istream &is, const GraphShape &shape,
                       const Vocabulary &vocab) {
  PairDataset ds;
  std::map<std::string, std::string, std::less<>> sequence_of;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line[0] == '#')
      continue;

    const auto cols = split_tabs(line);
    const std::string where = "line " + std::to_string(lineno);
    if (cols.size() != 3)
      throw Error(Errc::kFormat, where + ": expected 3 tab-separated columns, got "
                                     + std::to_string(cols.size()));
    if (cols[0].empty())
      throw Error(Errc::kFormat, where + ": empty target id");
    if (!is_amino_acid_sequence(cols[1]))
      throw Error(Errc::kFormat, where + ": sequence has non-canonical residues");

    PairRecord rec;
    rec.target_id = std::string(cols[0]);
    rec.sequence = std::string(cols[1]);
    rec.smiles = std::string(cols[2]);
    rec.line = lineno;

    auto [it, inserted] = sequence_of.emplace(rec.target_id, rec.sequence);
    if (!inserted && it->second != rec.sequence)
      throw Error(Errc::kFormat, where + ": target '" + rec.target_id
                                     + "' appears with two different sequences");

    try {
      rec.graph = parse_smiles(rec.smiles, shape, vocab);
    } catch (const Error &e) {
      throw Error(e.code(), where + ": " + e.what());
    }
    rec.split = split_for_sequence(rec.sequence);
    ds.records.push_back(std::move(rec));
  }
  if (is.bad())
    throw Error(Errc::kIo, "read failure after line " + std::to_string(lineno));
  return ds;
}

PairDataset load_pairs(const std::filesystem::path &path,
                       const GraphShape &shape, const Vocabulary &vocab) {
  std::ifstream in(path);
  if (!in)
    throw Error(Errc::kIo, "cannot open dataset '" + path.string() + "'");
  return read_pairs(in, shape, vocab);
}

void write_pairs(std::ostream &os, const PairDataset &dataset) {
  os << "# target_id\tsequence\tsmiles\n";
  for (const PairRecord &r: dataset.records)
    os << r.target_id << '\t' << r.sequence << '\t' << r.smiles << '\n';
}

}  // namespace tflow
