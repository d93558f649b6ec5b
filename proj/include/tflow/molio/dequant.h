//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_MOLIO_DEQUANT_H_
#define TFLOW_MOLIO_DEQUANT_H_

#include <span>
#include <vector>

#include "tflow/molio/molgraph.h"
#include "tflow/rng.h"

namespace tflow {

// Real-valued counterpart of a MolGraph: N x K atom scores and C x N x N
// bond scores, same layout as the one-hot views.
struct ContinuousGraph {
  GraphShape shape;
  std::vector<double> atoms;
  std::vector<double> bonds;
};

inline constexpr double kDefaultNoiseScale = 0.4;
inline constexpr double kOccupancyThreshold = 0.5;

// One-hot tensors plus independent U[0, noise_scale) noise per entry.
// E_RANGE unless 0 < noise_scale < 1.
ContinuousGraph dequantize(const MolGraph &graph, double noise_scale, Rng &rng);

// Atom slot i is padding when its best score is below 0.5 (exactly 0.5 is
// occupied), otherwise the argmax type (lowest index on ties). Bond (i, j)
// uses the average of [c,i,j] and [c,j,i]: the best channel wins when its
// average is >= 0.5, else no bond. Bonds touching padding are dropped.
MolGraph discretize(const ContinuousGraph &x);

// Bond-only decision (no atom occupancy), as a C x N x N one-hot tensor. Used
// to obtain the conditioning tensor before atoms are decoded.
std::vector<double> discretize_bonds(std::span<const double> bonds,
                                     const GraphShape &shape);

}  // namespace tflow

#endif  // TFLOW_MOLIO_DEQUANT_H_
