//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/molio/dequant.h"

#include <random>
#include <vector>

#include "tflow/error.h"

namespace tflow {
namespace {

// Best bond channel for pair (i, j), or 0 for no bond; orders are 1-based.
int decide_bond(std::span<const double> bonds, const GraphShape &shape, int i,
                int j) {
  const int n = shape.max_atoms;
  int best = 0;
  double best_score = 0.0;
  for (int c = 0; c < shape.bond_types; ++c) {
    const double avg =
        0.5 * (bonds[(c * n + i) * n + j] + bonds[(c * n + j) * n + i]);
    if (best == 0 || avg > best_score) {
      best = c + 1;
      best_score = avg;
    }
  }
  return best_score >= kOccupancyThreshold ? best : 0;
}

void check_shape(const ContinuousGraph &x) {
  if (static_cast<int>(x.atoms.size()) != x.shape.atom_dim()
      || static_cast<int>(x.bonds.size()) != x.shape.bond_dim())
    throw Error(Errc::kShape, "continuous graph does not match its shape");
}

}  // namespace

ContinuousGraph dequantize(const MolGraph &graph, double noise_scale,
                           Rng &rng) {
  if (!(noise_scale > 0.0 && noise_scale < 1.0))
    throw Error(Errc::kRange, "noise_scale must lie in (0, 1)");
  std::uniform_real_distribution<double> noise(0.0, noise_scale);
  ContinuousGraph out { graph.shape(), graph.atoms_onehot(),
                        graph.bonds_onehot() };
  for (double &a: out.atoms)
    a += noise(rng);
  for (double &b: out.bonds)
    b += noise(rng);
  return out;
}

MolGraph discretize(const ContinuousGraph &x) {
  check_shape(x);
  const GraphShape &shape = x.shape;
  const int n = shape.max_atoms;
  const int k = shape.num_types;
  MolGraph g(shape);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int t = 1; t < k; ++t) {
      if (x.atoms[i * k + t] > x.atoms[i * k + best])
        best = t;
    }
    if (x.atoms[i * k + best] >= kOccupancyThreshold)
      g.set_atom(i, best);
  }
  for (int i = 0; i < n; ++i) {
    if (!g.occupied(i))
      continue;
    for (int j = i + 1; j < n; ++j) {
      if (!g.occupied(j))
        continue;
      const int order = decide_bond(x.bonds, shape, i, j);
      if (order > 0)
        g.set_bond(i, j, order);
    }
  }
  return g;
}

std::vector<double> discretize_bonds(std::span<const double> bonds,
                                     const GraphShape &shape) {
  if (static_cast<int>(bonds.size()) != shape.bond_dim())
    throw Error(Errc::kShape, "bond tensor does not match shape");
  const int n = shape.max_atoms;
  std::vector<double> out(bonds.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int order = decide_bond(bonds, shape, i, j);
      if (order > 0) {
        out[((order - 1) * n + i) * n + j] = 1.0;
        out[((order - 1) * n + j) * n + i] = 1.0;
      }
    }
  }
  return out;
}

}  // namespace tflow
