//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "support/oracles.h"
#include "tflow/chem/chem.h"
#include "tflow/cli/synthetic.h"
#include "tflow/error.h"
#include "tflow/molio/dataset.h"
#include "tflow/molio/dequant.h"
#include "tflow/molio/molgraph.h"
#include "tflow/molio/smiles.h"

namespace tflow {
namespace {

const GraphShape kShape;
const Vocabulary kVocab = Vocabulary::default_vocabulary();

MolGraph parse(std::string_view s) {
  return parse_smiles(s, kShape, kVocab);
}

Errc parse_error(std::string_view s) {
  try {
    parse(s);
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for '" << s << "'";
  return Errc::kEmpty;
}

TEST(Smiles, SingleAtom) {
  const MolGraph g = parse("C");
  EXPECT_EQ(g.n_heavy(), 1);
  EXPECT_EQ(g.atom(0), *kVocab.find("C"));
  EXPECT_EQ(g.num_bonds(), 0);
}

TEST(Smiles, CarbonDioxideHasTwoDoubleBonds) {
  const MolGraph g = parse("O=C=O");
  EXPECT_EQ(g.n_heavy(), 3);
  EXPECT_EQ(g.num_bonds(), 2);
  EXPECT_EQ(g.bond(0, 1), 2);
  EXPECT_EQ(g.bond(1, 2), 2);
  EXPECT_EQ(g.bond(0, 2), 0);
}

TEST(Smiles, RingClosureFormsTriangle) {
  const MolGraph g = parse("C1CC1");
  EXPECT_EQ(g.n_heavy(), 3);
  EXPECT_EQ(g.num_bonds(), 3);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(g.bond_order_sum(i), 2);
  }
}

TEST(Smiles, BranchesAndTwoLetterElements) {
  const MolGraph g = parse("CC(Cl)(Br)C#N");
  EXPECT_EQ(g.n_heavy(), 6);
  EXPECT_EQ(g.atom(2), *kVocab.find("Cl"));
  EXPECT_EQ(g.atom(3), *kVocab.find("Br"));
  EXPECT_EQ(g.bond(1, 2), 1);
  EXPECT_EQ(g.bond(1, 3), 1);
  EXPECT_EQ(g.bond(1, 4), 1);
  EXPECT_EQ(g.bond(4, 5), 3);
}

TEST(Smiles, BracketAtoms) {
  const MolGraph g = parse("[Si](C)C");
  EXPECT_EQ(g.atom(0), *kVocab.find("Si"));
  EXPECT_EQ(g.num_bonds(), 2);
}

TEST(Smiles, TypedErrors) {
  EXPECT_EQ(parse_error("C(C"), Errc::kSyntax);
  EXPECT_EQ(parse_error("C1CC"), Errc::kSyntax);
  EXPECT_EQ(parse_error(")C"), Errc::kSyntax);
  EXPECT_EQ(parse_error("C=="), Errc::kSyntax);
  EXPECT_EQ(parse_error(""), Errc::kSyntax);
  EXPECT_EQ(parse_error("[Xe]"), Errc::kVocab);
  EXPECT_EQ(parse_error("[Na]"), Errc::kVocab);
  EXPECT_EQ(parse_error("c1ccccc1"), Errc::kAromatic);
  EXPECT_EQ(parse_error("CCCCCCCCCC"), Errc::kTooLarge);
}

TEST(Smiles, WriterRequiresConnectedNonEmptyGraph) {
  MolGraph g(kShape);
  EXPECT_THROW(write_smiles(g, kVocab), Error);
  g.set_atom(0, 0);
  g.set_atom(3, 1);
  try {
    write_smiles(g, kVocab);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kDisconnected);
  }
  EXPECT_EQ(write_smiles(parse("C"), kVocab), "C");
}

TEST(Smiles, RoundTripIsIsomorphicOnRandomGraphs) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const MolGraph g = random_molecule(rng, kShape, kVocab, 1);
    const MolGraph back = parse(write_smiles(g, kVocab));
    EXPECT_EQ(canonical_hash(back), canonical_hash(g));
    if (g.n_heavy() <= 7) {
      EXPECT_TRUE(oracle::brute_isomorphic(back, g)) << write_smiles(g, kVocab);
    }
  }
}

TEST(Smiles, RoundTripOfScatteredSlots) {
  MolGraph g(kShape);
  g.set_atom(8, 0);
  g.set_atom(2, 2);
  g.set_atom(5, 0);
  g.set_bond(8, 2, 1);
  g.set_bond(5, 8, 2);
  const MolGraph back = parse(write_smiles(g, kVocab));
  EXPECT_TRUE(oracle::brute_isomorphic(back, g));
}

TEST(MolGraph, InvariantsOnMutation) {
  MolGraph g(kShape);
  g.set_atom(0, 0);
  g.set_atom(1, 0);
  g.set_bond(0, 1, 2);
  EXPECT_EQ(g.bond(1, 0), 2);
  EXPECT_THROW(g.set_bond(0, 0, 1), Error);
  EXPECT_THROW(g.set_bond(0, 2, 1), Error);
  g.set_atom(1, -1);
  EXPECT_EQ(g.bond(0, 1), 0);
  const auto onehot = g.bonds_onehot();
  EXPECT_TRUE(std::all_of(onehot.begin(), onehot.end(), [](double v) { return v == 0.0; }));
}

TEST(MolGraph, OneHotViews) {
  const MolGraph g = parse("C=O");
  const auto a = g.atoms_onehot();
  const auto b = g.bonds_onehot();
  const int n = kShape.max_atoms, k = kShape.num_types;
  EXPECT_EQ(a[0 * k + 0], 1.0);
  EXPECT_EQ(a[1 * k + 2], 1.0);
  EXPECT_EQ(std::count(a.begin(), a.end(), 1.0), 2);
  EXPECT_EQ(b[1 * n * n + 0 * n + 1], 1.0);
  EXPECT_EQ(b[1 * n * n + 1 * n + 0], 1.0);
  EXPECT_EQ(std::count(b.begin(), b.end(), 1.0), 2);
}

TEST(MolGraph, PermutedAndCompacted) {
  const MolGraph g = parse("CCO");
  const MolGraph p = g.permuted({ 4, 7, 1, 0, 2, 3, 5, 6, 8 });
  EXPECT_EQ(p.atom(1), g.atom(2));
  EXPECT_EQ(p.bond(4, 7), 1);
  EXPECT_TRUE(oracle::brute_isomorphic(p, g));
  const MolGraph c = p.compacted();
  EXPECT_EQ(c.occupied_slots(), (std::vector<int> { 0, 1, 2 }));
  EXPECT_TRUE(oracle::brute_isomorphic(c, g));
}

TEST(Dataset, ParsesAndSplitsByTarget) {
  std::istringstream in(
      "# header\n"
      "T1\tMKV\tCCO\n"
      "T2\tAAAC\tC\n"
      "\n"
      "T3\tWWW\tO=C=O\n");
  const PairDataset d = read_pairs(in, kShape, kVocab);
  ASSERT_EQ(d.records.size(), 3U);
  EXPECT_EQ(d.records[2].line, 5);
  EXPECT_EQ(d.target_ids(), (std::vector<std::string> { "T1", "T2", "T3" }));
  for (const auto &r: d.records)
    EXPECT_EQ(r.split, split_for_sequence(r.sequence));
}

TEST(Dataset, RepeatedTargetStaysInOneSplit) {
  std::ostringstream text;
  for (int i = 0; i < 5; ++i)
    text << "T9\tMKVLAAGW\t" << std::string(i + 1, 'C') << "\n";
  std::istringstream in(text.str());
  const PairDataset d = read_pairs(in, kShape, kVocab);
  ASSERT_EQ(d.records.size(), 5U);
  for (const auto &r: d.records)
    EXPECT_EQ(r.split, d.records[0].split);
}

TEST(Dataset, EmptyInput) {
  std::istringstream in("");
  EXPECT_TRUE(read_pairs(in, kShape, kVocab).records.empty());
}

TEST(Dataset, ErrorsCarryLineNumbers) {
  auto code_of = [](const std::string &text, std::string *what) {
    std::istringstream in(text);
    try {
      read_pairs(in, kShape, kVocab);
    } catch (const Error &e) {
      *what = e.what();
      return e.code();
    }
    return Errc::kEmpty;
  };
  std::string what;
  EXPECT_EQ(code_of("T1\tMKV\n", &what), Errc::kFormat);
  EXPECT_EQ(code_of("T1\tMKV\tC\nT2\tMKV\tC(\n", &what), Errc::kSyntax);
  EXPECT_NE(what.find("line 2"), std::string::npos) << what;
  EXPECT_EQ(code_of("T1\tMKV\tC\nT1\tMKA\tC\n", &what), Errc::kFormat);
  EXPECT_EQ(code_of("T1\tMKB\tC\n", &what), Errc::kFormat);
  EXPECT_THROW(load_pairs("/nonexistent/pairs.tsv", kShape, kVocab), Error);
}

TEST(Dataset, WriteReadRoundTrip) {
  SyntheticOptions so;
  so.pairs = 12;
  so.seed = 3;
  const PairDataset d = make_synthetic(so, kShape, kVocab);
  std::stringstream io;
  write_pairs(io, d);
  const PairDataset back = read_pairs(io, kShape, kVocab);
  ASSERT_EQ(back.records.size(), d.records.size());
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    EXPECT_EQ(back.records[i].smiles, d.records[i].smiles);
    EXPECT_EQ(back.records[i].graph, d.records[i].graph);
  }
}

TEST(Dequant, NoiseIsBoundedWithExpectedMean) {
  const MolGraph g = parse("CC=O");
  Rng rng(5);
  double sum = 0.0;
  std::size_t count = 0;
  const auto a0 = g.atoms_onehot();
  for (int s = 0; s < 1000; ++s) {
    const ContinuousGraph x = dequantize(g, 0.4, rng);
    for (std::size_t i = 0; i < a0.size(); ++i) {
      const double noise = x.atoms[i] - a0[i];
      ASSERT_GE(noise, 0.0);
      ASSERT_LT(noise, 0.4);
      sum += noise;
      ++count;
    }
  }
  EXPECT_NEAR(sum / count, 0.2, 0.02);
  EXPECT_THROW(dequantize(g, 0.0, rng), Error);
  EXPECT_THROW(dequantize(g, 1.0, rng), Error);
}

TEST(Dequant, DiscretizeInvertsDequantize) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const MolGraph g = random_molecule(rng, kShape, kVocab, 1);
    EXPECT_EQ(discretize(dequantize(g, 0.4, rng)), g);
  }
}

TEST(Dequant, ThresholdBoundary) {
  ContinuousGraph x { kShape, std::vector<double>(kShape.atom_dim(), 0.0),
                      std::vector<double>(kShape.bond_dim(), 0.0) };
  x.atoms[0 * kShape.num_types + 1] = 0.5;
  x.atoms[1 * kShape.num_types + 0] = 0.4999;
  const MolGraph g = discretize(x);
  EXPECT_EQ(g.atom(0), 1);
  EXPECT_FALSE(g.occupied(1));
}

}  // namespace
}  // namespace tflow
