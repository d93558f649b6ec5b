//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/molio/molgraph.h"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "tflow/error.h"

namespace tflow {

Vocabulary::Vocabulary(std::vector<Element> elements)
    : elements_(std::move(elements)) {
  for (const Element &e: elements_) {
    if (e.symbol.empty() || e.max_valence < 1)
      throw Error(Errc::kRange, "invalid vocabulary entry '" + e.symbol + "'");
  }
}

Vocabulary Vocabulary::default_vocabulary() {
  return Vocabulary({
      { "C", 4 },
      { "N", 3 },
      { "O", 2 },
      { "F", 1 },
      { "P", 5 },
      { "S", 6 },
      { "Cl", 1 },
      { "Br", 1 },
      { "I", 1 },
      { "B", 3 },
      { "Si", 4 },
  });
}

std::optional<int> Vocabulary::find(std::string_view symbol) const {
  for (int i = 0; i < size(); ++i) {
    if (elements_[i].symbol == symbol)
      return i;
  }
  return std::nullopt;
}

MolGraph::MolGraph(const GraphShape &shape)
    : shape_(shape), atoms_(shape.max_atoms, -1),
      bonds_(static_cast<std::size_t>(shape.max_atoms) * shape.max_atoms, 0) {
  if (shape.max_atoms < 1 || shape.num_types < 1 || shape.bond_types < 1)
    throw Error(Errc::kShape, "graph shape dimensions must be positive");
}

void MolGraph::set_atom(int i, int type) {
  if (i < 0 || i >= max_atoms() || type < -1 || type >= shape_.num_types)
    throw Error(Errc::kRange, "atom slot or type out of range");
  atoms_[i] = static_cast<std::int8_t>(type);
  if (type < 0) {
    for (int j = 0; j < max_atoms(); ++j) {
      bonds_[i * max_atoms() + j] = 0;
      bonds_[j * max_atoms() + i] = 0;
    }
  }
}

void MolGraph::set_bond(int i, int j, int order) {
  const int n = max_atoms();
  if (i < 0 || j < 0 || i >= n || j >= n || i == j || order < 0
      || order > shape_.bond_types)
    throw Error(Errc::kRange, "bond slot or order out of range");
  if (order > 0 && (!occupied(i) || !occupied(j)))
    throw Error(Errc::kRange, "bond touches a padding slot");
  bonds_[i * n + j] = static_cast<std::int8_t>(order);
  bonds_[j * n + i] = static_cast<std::int8_t>(order);
}

int MolGraph::n_heavy() const {
  return static_cast<int>(
      std::count_if(atoms_.begin(), atoms_.end(), [](auto a) { return a >= 0; }));
}

int MolGraph::num_bonds() const {
  int count = 0;
  for (int i = 0; i < max_atoms(); ++i) {
    for (int j = i + 1; j < max_atoms(); ++j)
      count += bond(i, j) > 0 ? 1 : 0;
  }
  return count;
}

std::vector<int> MolGraph::occupied_slots() const {
  std::vector<int> slots;
  for (int i = 0; i < max_atoms(); ++i) {
    if (occupied(i))
      slots.push_back(i);
  }
  return slots;
}

std::vector<int> MolGraph::neighbors(int i) const {
  std::vector<int> nbrs;
  for (int j = 0; j < max_atoms(); ++j) {
    if (bond(i, j) > 0)
      nbrs.push_back(j);
  }
  return nbrs;
}

int MolGraph::bond_order_sum(int i) const {
  int sum = 0;
  for (int j = 0; j < max_atoms(); ++j)
    sum += bond(i, j);
  return sum;
}

std::vector<std::vector<int>> MolGraph::components() const {
  std::vector<std::vector<int>> comps;
  std::vector<bool> seen(max_atoms(), false);
  for (int start = 0; start < max_atoms(); ++start) {
    if (!occupied(start) || seen[start])
      continue;
    std::vector<int> comp;
    std::vector<int> stack { start };
    seen[start] = true;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      comp.push_back(u);
      for (int v: neighbors(u)) {
        if (!seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

std::vector<double> MolGraph::atoms_onehot() const {
  const int k = shape_.num_types;
  std::vector<double> out(static_cast<std::size_t>(max_atoms()) * k, 0.0);
  for (int i = 0; i < max_atoms(); ++i) {
    if (occupied(i))
      out[i * k + atom(i)] = 1.0;
  }
  return out;
}

std::vector<double> MolGraph::bonds_onehot() const {
  const int n = max_atoms();
  std::vector<double> out(static_cast<std::size_t>(shape_.bond_dim()), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int order = bond(i, j);
      if (order > 0)
        out[(order - 1) * n * n + i * n + j] = 1.0;
    }
  }
  return out;
}

MolGraph MolGraph::permuted(const std::vector<int> &perm) const {
  const int n = max_atoms();
  if (static_cast<int>(perm.size()) != n)
    throw Error(Errc::kShape, "permutation size does not match slot count");
  MolGraph out(shape_);
  for (int i = 0; i < n; ++i)
    out.atoms_[perm[i]] = atoms_[i];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      out.bonds_[perm[i] * n + perm[j]] = bonds_[i * n + j];
  }
  return out;
}

MolGraph MolGraph::compacted() const {
  std::vector<int> perm(max_atoms());
  int next = 0;
  for (int i = 0; i < max_atoms(); ++i) {
    if (occupied(i))
      perm[i] = next++;
  }
  for (int i = 0; i < max_atoms(); ++i) {
    if (!occupied(i))
      perm[i] = next++;
  }
  return permuted(perm);
}

}  // namespace tflow
