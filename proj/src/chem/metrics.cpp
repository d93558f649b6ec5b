//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/chem/metrics.h"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "tflow/error.h"
#include "tflow/molio/smiles.h"

namespace tflow {
namespace {

double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num)
                              / static_cast<double>(den);
}

std::string hex64(std::uint64_t x) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << x;
  return ss.str();
}

}  // namespace

MetricsReport evaluate(const std::vector<MolGraph> &generated,
                       const std::vector<MolGraph> &train_set,
                       const Vocabulary &vocab, const MetricsOptions &options) {
  if (train_set.empty())
    throw Error(Errc::kEmptyTrain,
                "novelty and similarity need a non-empty training set");

  std::unordered_set<std::uint64_t> train_hashes;
  std::vector<Fingerprint> train_fps;
  train_fps.reserve(train_set.size());
  for (const MolGraph &g: train_set) {
    train_hashes.insert(canonical_hash(g));
    train_fps.push_back(circular_fingerprint(g, options.fingerprint_radius,
                                             options.fingerprint_width));
  }

  MetricsReport report;
  report.total = generated.size();
  std::unordered_set<std::uint64_t> seen;
  double sim_sum = 0.0;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    const MolGraph &g = generated[i];
    MoleculeRow row;
    row.index = i;
    row.valid = check_valence(g, vocab);
    if (g.n_heavy() > 0 && g.connected())
      row.smiles = write_smiles(g, vocab);
    if (row.valid) {
      ++report.valid;
      row.hash = canonical_hash(g);
      row.duplicate = !seen.insert(row.hash).second;
      row.novel = train_hashes.count(row.hash) == 0;
      if (row.novel)
        ++report.novel;
      const Fingerprint fp = circular_fingerprint(
          g, options.fingerprint_radius, options.fingerprint_width);
      double best = 0.0;
      for (const Fingerprint &t: train_fps)
        best = std::max(best, tanimoto(fp, t));
      row.nn_tanimoto = 100.0 * best;
      sim_sum += best;
    }
    report.rows.push_back(std::move(row));
  }
  report.unique = seen.size();
  report.validity = percent(report.valid, report.total);
  report.uniqueness = percent(report.unique, report.valid);
  report.novelty = percent(report.novel, report.valid);
  report.nn_tanimoto =
      report.valid == 0 ? 0.0
                        : 100.0 * sim_sum / static_cast<double>(report.valid);
  return report;
}

nlohmann::json to_json(const MetricsReport &report) {
  nlohmann::json j;
  j["total"] = report.total;
  j["valid"] = report.valid;
  j["unique"] = report.unique;
  j["novel"] = report.novel;
  j["validity"] = report.validity;
  j["uniqueness"] = report.uniqueness;
  j["novelty"] = report.novelty;
  j["nn_tanimoto"] = report.nn_tanimoto;
  nlohmann::json rows = nlohmann::json::array();
  for (const MoleculeRow &r: report.rows) {
    nlohmann::json row;
    row["index"] = r.index;
    row["smiles"] = r.smiles;
    row["valid"] = r.valid;
    row["duplicate"] = r.duplicate;
    row["novel"] = r.novel;
    row["hash"] = hex64(r.hash);
    row["nn_tanimoto"] =
        r.nn_tanimoto ? nlohmann::json(*r.nn_tanimoto) : nlohmann::json();
    rows.push_back(std::move(row));
  }
  j["molecules"] = std::move(rows);
  return j;
}

void write_rows_csv(std::ostream &os, const MetricsReport &report) {
  os << "index,smiles,valid,duplicate,novel,hash,nn_tanimoto\n";
  std::ostringstream num;
  num << std::setprecision(17);
  for (const MoleculeRow &r: report.rows) {
    os << r.index << ',' << r.smiles << ',' << (r.valid ? 1 : 0) << ','
       << (r.duplicate ? 1 : 0) << ',' << (r.novel ? 1 : 0) << ','
       << hex64(r.hash) << ',';
    if (r.nn_tanimoto) {
      num.str("");
      num << *r.nn_tanimoto;
      os << num.str();
    }
    os << '\n';
  }
}

}  // namespace tflow
