//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_CHEM_CHEM_H_
#define TFLOW_CHEM_CHEM_H_

#include <cstdint>
#include <vector>

#include "tflow/molio/molgraph.h"

namespace tflow {

// Connected, non-empty, and every atom's bond-order sum within the maximum
// valence of its element.
bool check_valence(const MolGraph &graph, const Vocabulary &vocab);

struct Fingerprint {
  int width = 2048;
  int radius = 2;
  std::vector<std::uint64_t> words;

  bool test(int bit) const { return (words[bit / 64] >> (bit % 64)) & 1U; }
  int bit_count() const;
  std::vector<int> on_bits() const;

  bool operator==(const Fingerprint &) const = default;
};

inline constexpr int kDefaultFingerprintRadius = 2;
inline constexpr int kDefaultFingerprintWidth = 2048;

// Fixed seed of the fingerprint hash; part of the fingerprint definition.
inline constexpr std::uint64_t kFingerprintSeed = 0x5eed'f1a9'2048'0002ULL;

// Circular (ECFP-style) fingerprint. Round 0 identifiers hash the element,
// heavy degree and bond-order sum; each later round rehashes an atom's
// identifier with the sorted (bond order, neighbor identifier) pairs. Every
// identifier of every round sets bit (id mod width).
Fingerprint circular_fingerprint(const MolGraph &graph,
                                 int radius = kDefaultFingerprintRadius,
                                 int width = kDefaultFingerprintWidth);

Fingerprint fingerprint_from_bits(const std::vector<int> &bits, int width,
                                  int radius = 0);

// |a & b| / |a | b|, 1 when both are empty. E_WIDTH_MISMATCH on unequal
// widths.
double tanimoto(const Fingerprint &a, const Fingerprint &b);

// Isomorphism-invariant digest over occupied atoms: color refinement
// (Weisfeiler-Lehman over element and bond order) to a stable partition,
// individualization of remaining symmetric cells to reach a canonical order,
// then a hash of the canonical atom sequence and bond matrix.
std::uint64_t canonical_hash(const MolGraph &graph);

}  // namespace tflow

#endif  // TFLOW_CHEM_CHEM_H_
