//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/molio/smiles.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tflow/error.h"

namespace tflow {
namespace {

constexpr std::string_view kOrganic[] = { "B", "C", "N", "O", "P",
                                          "S", "F", "Cl", "Br", "I" };
constexpr std::string_view kAromatic = "bcnops";

bool is_organic(std::string_view symbol) {
  return std::find(std::begin(kOrganic), std::end(kOrganic), symbol)
         != std::end(kOrganic);
}

enum class Token {
  kStart,
  kAtom,
  kRing,
  kBond,
  kOpen,
  kClose,
};

class SmilesParser {
public:
  SmilesParser(std::string_view s, const GraphShape &shape,
               const Vocabulary &vocab)
      : s_(s), vocab_(vocab), graph_(shape) { }

  MolGraph parse() {
    if (s_.empty())
      fail(Errc::kSyntax, "empty string");

    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (static_cast<unsigned char>(c) > 127)
        fail(Errc::kSyntax, "non-ASCII byte");

      if (c == '[') {
        add_atom(bracket_atom());
      } else if (std::isupper(static_cast<unsigned char>(c))) {
        add_atom(organic_atom());
      } else if (std::islower(static_cast<unsigned char>(c))) {
        if (kAromatic.find(c) != std::string_view::npos)
          fail(Errc::kAromatic, "aromatic atom; input must be kekulized");
        fail(Errc::kSyntax, "unexpected lowercase character");
      } else if (c == '-' || c == '=' || c == '#') {
        bond_token(c == '-' ? 1 : c == '=' ? 2 : 3);
      } else if (c == '(') {
        open_branch();
      } else if (c == ')') {
        close_branch();
      } else if (c >= '1' && c <= '9') {
        ring_digit(c - '0');
      } else {
        fail(Errc::kSyntax, "unexpected character");
      }
    }

    if (last_ != Token::kAtom && last_ != Token::kRing
        && last_ != Token::kClose)
      fail(Errc::kSyntax, "dangling bond or branch at end of string");
    if (!branches_.empty())
      fail(Errc::kSyntax, "unclosed branch");
    for (const auto &ring: rings_) {
      if (ring.has_value())
        fail(Errc::kSyntax, "unclosed ring bond");
    }
    return graph_;
  }

private:
  struct OpenRing {
    int atom;
    int order;  // 0 when the opening did not specify one
  };

  [[noreturn]] void fail(Errc code, const std::string &what) const {
    throw Error(code, what + " at position " + std::to_string(pos_));
  }

  int lookup(std::string_view symbol) {
    const std::optional<int> type = vocab_.find(symbol);
    if (!type)
      fail(Errc::kVocab,
           "element '" + std::string(symbol) + "' outside the vocabulary");
    return *type;
  }

  int organic_atom() {
    std::string_view symbol = s_.substr(pos_, 1);
    if (pos_ + 1 < s_.size()
        && ((s_[pos_] == 'C' && s_[pos_ + 1] == 'l')
            || (s_[pos_] == 'B' && s_[pos_ + 1] == 'r')))
      symbol = s_.substr(pos_, 2);
    if (!is_organic(symbol))
      fail(Errc::kSyntax, "element outside the organic subset needs brackets");
    const int type = lookup(symbol);
    pos_ += symbol.size();
    return type;
  }

  int bracket_atom() {
    const std::size_t close = s_.find(']', pos_);
    if (close == std::string_view::npos)
      fail(Errc::kSyntax, "unclosed bracket atom");
    const std::string_view body = s_.substr(pos_ + 1, close - pos_ - 1);
    if (body.empty())
      fail(Errc::kSyntax, "empty bracket atom");
    if (std::islower(static_cast<unsigned char>(body[0]))) {
      if (kAromatic.find(body[0]) != std::string_view::npos)
        fail(Errc::kAromatic, "aromatic atom; input must be kekulized");
      fail(Errc::kSyntax, "malformed bracket atom");
    }
    const bool symbol_ok =
        std::isupper(static_cast<unsigned char>(body[0]))
        && (body.size() == 1
            || (body.size() == 2
                && std::islower(static_cast<unsigned char>(body[1]))));
    if (!symbol_ok)
      fail(Errc::kSyntax,
           "bracket atoms may only hold an element symbol (no H, charge, "
           "isotope or chirality)");
    const int type = lookup(body);
    pos_ = close + 1;
    return type;
  }

  void add_atom(int type) {
    if (atoms_ >= graph_.max_atoms())
      fail(Errc::kTooLarge, "more than " + std::to_string(graph_.max_atoms())
                                + " heavy atoms");
    const int idx = atoms_++;
    graph_.set_atom(idx, type);
    if (prev_ >= 0)
      connect(prev_, idx, pending_ > 0 ? pending_ : 1);
    pending_ = 0;
    prev_ = idx;
    last_ = Token::kAtom;
  }

  void connect(int a, int b, int order) {
    if (order > graph_.shape().bond_types)
      fail(Errc::kVocab, "bond order outside the configured bond channels");
    if (graph_.bond(a, b) > 0)
      fail(Errc::kSyntax, "duplicate bond");
    graph_.set_bond(a, b, order);
  }

  void bond_token(int order) {
    if (last_ != Token::kAtom && last_ != Token::kRing && last_ != Token::kOpen
        && last_ != Token::kClose)
      fail(Errc::kSyntax, "misplaced bond symbol");
    bond_follows_ringable_ = last_ == Token::kAtom || last_ == Token::kRing;
    pending_ = order;
    last_ = Token::kBond;
    ++pos_;
  }

  void open_branch() {
    if (last_ != Token::kAtom && last_ != Token::kRing
        && last_ != Token::kClose)
      fail(Errc::kSyntax, "misplaced '('");
    branches_.push_back(prev_);
    last_ = Token::kOpen;
    ++pos_;
  }

  void close_branch() {
    if (branches_.empty())
      fail(Errc::kSyntax, "unmatched ')'");
    if (last_ != Token::kAtom && last_ != Token::kRing)
      fail(Errc::kSyntax, "empty branch or dangling bond before ')'");
    prev_ = branches_.back();
    branches_.pop_back();
    last_ = Token::kClose;
    ++pos_;
  }

  void ring_digit(int digit) {
    const bool ringable =
        last_ == Token::kAtom || last_ == Token::kRing
        || (last_ == Token::kBond && bond_follows_ringable_);
    if (!ringable)
      fail(Errc::kSyntax, "misplaced ring-closure digit");

    std::optional<OpenRing> &slot = rings_[digit];
    if (!slot) {
      slot = OpenRing { prev_, pending_ };
    } else {
      const OpenRing ring = *slot;
      slot.reset();
      if (ring.atom == prev_)
        fail(Errc::kSyntax, "ring closure to the same atom");
      if (ring.order > 0 && pending_ > 0 && ring.order != pending_)
        fail(Errc::kSyntax, "conflicting ring-closure bond orders");
      const int order = ring.order > 0 ? ring.order
                        : pending_ > 0 ? pending_
                                       : 1;
      connect(ring.atom, prev_, order);
    }
    pending_ = 0;
    last_ = Token::kRing;
    ++pos_;
  }

  std::string_view s_;
  const Vocabulary &vocab_;
  MolGraph graph_;

  std::size_t pos_ = 0;
  int atoms_ = 0;
  int prev_ = -1;
  int pending_ = 0;
  bool bond_follows_ringable_ = false;
  Token last_ = Token::kStart;
  std::vector<int> branches_;
  std::array<std::optional<OpenRing>, 10> rings_;
};

class SmilesWriter {
public:
  SmilesWriter(const MolGraph &g, const Vocabulary &vocab)
      : g_(g), vocab_(vocab), n_(g.max_atoms()), parent_(n_, -1),
        visit_(n_, -1), ring_digit_(static_cast<std::size_t>(n_) * n_, 0) { }

  std::string write() {
    const auto comps = g_.components();
    if (comps.empty())
      throw Error(Errc::kEmpty, "graph has no atoms");
    if (comps.size() > 1)
      throw Error(Errc::kDisconnected,
                  "graph has " + std::to_string(comps.size()) + " components");

    const int root = comps[0][0];
    int counter = 0;
    dfs(root, counter);
    emit(root);
    return out_;
  }

private:
  void dfs(int u, int &counter) {
    visit_[u] = counter++;
    for (int v: g_.neighbors(u)) {
      if (visit_[v] < 0) {
        parent_[v] = u;
        dfs(v, counter);
      }
    }
  }

  bool is_tree_edge(int u, int v) const {
    return parent_[v] == u || parent_[u] == v;
  }

  void bond_symbol(int order) {
    if (order == 2)
      out_ += '=';
    else if (order == 3)
      out_ += '#';
  }

  void atom_symbol(int u) {
    const std::string &sym = vocab_[g_.atom(u)].symbol;
    if (is_organic(sym)) {
      out_ += sym;
    } else {
      out_ += '[';
      out_ += sym;
      out_ += ']';
    }
  }

  int take_digit() {
    for (int d = 1; d <= 9; ++d) {
      if (!digit_used_[d]) {
        digit_used_[d] = true;
        return d;
      }
    }
    throw Error(Errc::kRange, "more than 9 simultaneously open ring bonds");
  }

  void emit(int u) {
    atom_symbol(u);

    // Closings first so their digits can be reused by openings at u.
    std::vector<int> ring_nbrs;
    for (int v: g_.neighbors(u)) {
      if (!is_tree_edge(u, v))
        ring_nbrs.push_back(v);
    }
    std::sort(ring_nbrs.begin(), ring_nbrs.end(),
              [&](int a, int b) { return visit_[a] < visit_[b]; });
    for (int v: ring_nbrs) {
      if (visit_[v] < visit_[u]) {
        const int d = ring_digit_[v * n_ + u];
        out_ += static_cast<char>('0' + d);
        digit_used_[d] = false;
      }
    }
    for (int v: ring_nbrs) {
      if (visit_[v] > visit_[u]) {
        const int d = take_digit();
        ring_digit_[u * n_ + v] = d;
        bond_symbol(g_.bond(u, v));
        out_ += static_cast<char>('0' + d);
      }
    }

    std::vector<int> kids;
    for (int v: g_.neighbors(u)) {
      if (parent_[v] == u)
        kids.push_back(v);
    }
    std::sort(kids.begin(), kids.end(),
              [&](int a, int b) { return visit_[a] < visit_[b]; });
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const bool branch = k + 1 < kids.size();
      if (branch)
        out_ += '(';
      bond_symbol(g_.bond(u, kids[k]));
      emit(kids[k]);
      if (branch)
        out_ += ')';
    }
  }

  const MolGraph &g_;
  const Vocabulary &vocab_;
  int n_;
  std::vector<int> parent_;
  std::vector<int> visit_;
  std::vector<int> ring_digit_;
  std::array<bool, 10> digit_used_ {};
  std::string out_;
};

}  // namespace

MolGraph parse_smiles(std::string_view smiles, const GraphShape &shape,
                      const Vocabulary &vocab) {
  if (shape.num_types != vocab.size())
    throw Error(Errc::kShape, "graph shape K does not match vocabulary size");
  return SmilesParser(smiles, shape, vocab).parse();
}

std::string write_smiles(const MolGraph &graph, const Vocabulary &vocab) {
  return SmilesWriter(graph, vocab).write();
}

}  // namespace tflow
