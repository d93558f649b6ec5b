//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_MOLIO_MOLGRAPH_H_
#define TFLOW_MOLIO_MOLGRAPH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tflow {

// Atom vocabulary with the maximum valence of every element. The index of a
// symbol is its one-hot column in the atom matrix.
class Vocabulary {
public:
  struct Element {
    std::string symbol;
    int max_valence;

    bool operator==(const Element &) const = default;
  };

  Vocabulary() = default;
  explicit Vocabulary(std::vector<Element> elements);

  // C N O F P S Cl Br I B Si
  static Vocabulary default_vocabulary();

  int size() const { return static_cast<int>(elements_.size()); }
  const Element &operator[](int i) const { return elements_[i]; }
  std::optional<int> find(std::string_view symbol) const;
  int max_valence(int type) const { return elements_[type].max_valence; }

  const std::vector<Element> &elements() const { return elements_; }

  bool operator==(const Vocabulary &) const = default;

private:
  std::vector<Element> elements_;
};

// Fixed tensor dimensions of the graph model: N atom slots, K atom types,
// C bond types (single, double, triple by default).
struct GraphShape {
  int max_atoms = 9;
  int num_types = 11;
  int bond_types = 3;

  int atom_dim() const { return max_atoms * num_types; }
  int bond_dim() const { return bond_types * max_atoms * max_atoms; }
  int latent_dim() const { return atom_dim() + bond_dim(); }

  bool operator==(const GraphShape &) const = default;
};

// Discrete molecular graph over N fixed slots. Stored as per-slot atom type
// (-1 for padding) and a symmetric matrix of bond orders (0 = no bond,
// c + 1 for bond channel c); the one-hot atom matrix and bond tensor are
// derived views. Mutators keep the structural invariants: no self bonds,
// symmetric orders, no bond touching a padding slot.
class MolGraph {
public:
  MolGraph() = default;
  explicit MolGraph(const GraphShape &shape);

  const GraphShape &shape() const { return shape_; }
  int max_atoms() const { return shape_.max_atoms; }

  int atom(int i) const { return atoms_[i]; }
  bool occupied(int i) const { return atoms_[i] >= 0; }
  int bond(int i, int j) const { return bonds_[i * shape_.max_atoms + j]; }

  // Setting a slot to padding (-1) removes its bonds.
  void set_atom(int i, int type);
  // order in [0, C]; both slots must be occupied when order > 0.
  void set_bond(int i, int j, int order);

  int n_heavy() const;
  int num_bonds() const;
  std::vector<int> occupied_slots() const;
  std::vector<int> neighbors(int i) const;
  int bond_order_sum(int i) const;

  // Connected components over occupied slots, each sorted ascending; the
  // list is ordered by smallest member.
  std::vector<std::vector<int>> components() const;
  bool connected() const { return components().size() <= 1; }

  // N x K row-major, rows of padding slots are zero.
  std::vector<double> atoms_onehot() const;
  // C x N x N, channel-major.
  std::vector<double> bonds_onehot() const;

  // Relabels slots: new slot perm[i] receives old slot i.
  MolGraph permuted(const std::vector<int> &perm) const;

  // Moves occupied slots to the front, preserving relative order.
  MolGraph compacted() const;

  bool operator==(const MolGraph &) const = default;

private:
  GraphShape shape_;
  std::vector<std::int8_t> atoms_;
  std::vector<std::int8_t> bonds_;
};

}  // namespace tflow

#endif  // TFLOW_MOLIO_MOLGRAPH_H_
