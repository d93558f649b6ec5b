//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/chem/chem.h"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <tuple>
#include <utility>
#include <vector>

#include "tflow/error.h"
#include "tflow/kernels.h"
#include "tflow/rng.h"

namespace tflow {

bool check_valence(const MolGraph &graph, const Vocabulary &vocab) {
  if (graph.n_heavy() == 0 || !graph.connected())
    return false;
  for (int i = 0; i < graph.max_atoms(); ++i) {
    if (graph.occupied(i)
        && graph.bond_order_sum(i) > vocab.max_valence(graph.atom(i)))
      return false;
  }
  return true;
}

int Fingerprint::bit_count() const {
  int count = 0;
  for (const std::uint64_t w: words)
    count += std::popcount(w);
  return count;
}

std::vector<int> Fingerprint::on_bits() const {
  std::vector<int> bits;
  for (int b = 0; b < width; ++b) {
    if (test(b))
      bits.push_back(b);
  }
  return bits;
}

Fingerprint fingerprint_from_bits(const std::vector<int> &bits, int width,
                                  int radius) {
  if (width <= 0)
    throw Error(Errc::kRange, "fingerprint width must be positive");
  Fingerprint fp { width, radius,
                   std::vector<std::uint64_t>((width + 63) / 64, 0) };
  for (const int b: bits) {
    if (b < 0 || b >= width)
      throw Error(Errc::kRange, "bit index outside fingerprint width");
    fp.words[b / 64] |= std::uint64_t { 1 } << (b % 64);
  }
  return fp;
}

Fingerprint circular_fingerprint(const MolGraph &graph, int radius,
                                 int width) {
  if (radius < 0)
    throw Error(Errc::kRange, "fingerprint radius must be non-negative");
  Fingerprint fp = fingerprint_from_bits({}, width, radius);
  const std::vector<int> atoms = graph.occupied_slots();
  const int n = graph.max_atoms();

  auto set_bit = [&](std::uint64_t id) {
    const auto bit = static_cast<int>(id % static_cast<std::uint64_t>(width));
    fp.words[bit / 64] |= std::uint64_t { 1 } << (bit % 64);
  };

  std::vector<std::uint64_t> ids(n, 0);
  for (const int v: atoms) {
    std::uint64_t h = hash_combine(kFingerprintSeed, graph.atom(v) + 1);
    h = hash_combine(h, graph.neighbors(v).size());
    h = hash_combine(h, graph.bond_order_sum(v));
    ids[v] = h;
    set_bit(h);
  }

  std::vector<std::uint64_t> next(n, 0);
  std::vector<std::pair<int, std::uint64_t>> env;
  for (int r = 1; r <= radius; ++r) {
    for (const int v: atoms) {
      env.clear();
      for (const int u: graph.neighbors(v))
        env.emplace_back(graph.bond(v, u), ids[u]);
      std::sort(env.begin(), env.end());
      std::uint64_t h = hash_combine(ids[v], r);
      for (const auto &[order, id]: env)
        h = hash_combine(hash_combine(h, order), id);
      next[v] = h;
      set_bit(h);
    }
    std::swap(ids, next);
  }
  return fp;
}

double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.width != b.width || a.words.size() != b.words.size())
    throw Error(Errc::kWidthMismatch, "fingerprint widths differ");
  std::uint64_t both = 0, either = 0;
  kernels::active().and_or_popcount(a.words.data(), b.words.data(),
                                    a.words.size(), &both, &either);
  if (either == 0)
    return 1.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

namespace {

class Canonicalizer {
public:
  explicit Canonicalizer(const MolGraph &g): g_(g), verts_(g.occupied_slots()) {
    const int v = static_cast<int>(verts_.size());
    adj_.assign(static_cast<std::size_t>(v) * v, 0);
    for (int a = 0; a < v; ++a) {
      for (int b = 0; b < v; ++b)
        adj_[a * v + b] = g.bond(verts_[a], verts_[b]);
    }
  }

  std::vector<int> certificate() {
    const int v = static_cast<int>(verts_.size());
    std::vector<int> colors(v);
    for (int a = 0; a < v; ++a)
      colors[a] = g_.atom(verts_[a]);
    search(colors);
    return best_;
  }

private:
  // Refines to a stable coloring whose color values are canonical ranks.
  std::vector<int> refine(std::vector<int> colors) const {
    const int v = static_cast<int>(colors.size());
    using Signature = std::pair<int, std::vector<std::pair<int, int>>>;
    int distinct = -1;
    for (int round = 0; round <= v; ++round) {
      std::vector<Signature> sigs(v);
      for (int a = 0; a < v; ++a) {
        sigs[a].first = colors[a];
        for (int b = 0; b < v; ++b) {
          if (adj_[a * v + b] > 0)
            sigs[a].second.emplace_back(adj_[a * v + b], colors[b]);
        }
        std::sort(sigs[a].second.begin(), sigs[a].second.end());
      }
      std::vector<Signature> sorted = sigs;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      for (int a = 0; a < v; ++a) {
        colors[a] = static_cast<int>(
            std::lower_bound(sorted.begin(), sorted.end(), sigs[a])
            - sorted.begin());
      }
      const int now = static_cast<int>(sorted.size());
      if (now == distinct)
        break;
      distinct = now;
    }
    return colors;
  }

  void search(const std::vector<int> &input) {
    const std::vector<int> colors = refine(input);
    const int v = static_cast<int>(colors.size());

    std::vector<int> cell_size(v + 1, 0);
    for (const int c: colors)
      ++cell_size[c];
    int target = -1;
    for (int c = 0; c <= v; ++c) {
      if (cell_size[c] > 1) {
        target = c;
        break;
      }
    }

    if (target < 0) {
      std::vector<int> order(v);
      for (int a = 0; a < v; ++a)
        order[colors[a]] = a;
      std::vector<int> cert;
      cert.reserve(1 + v + v * v);
      cert.push_back(v);
      for (const int a: order)
        cert.push_back(g_.atom(verts_[a]));
      for (int x = 0; x < v; ++x) {
        for (int y = x + 1; y < v; ++y)
          cert.push_back(adj_[order[x] * v + order[y]]);
      }
      if (best_.empty() || cert < best_)
        best_ = std::move(cert);
      return;
    }

    for (int a = 0; a < v; ++a) {
      if (colors[a] != target)
        continue;
      std::vector<int> split(v);
      for (int b = 0; b < v; ++b)
        split[b] = 2 * colors[b] + 1;
      split[a] = 2 * colors[a];
      search(split);
    }
  }

  const MolGraph &g_;
  std::vector<int> verts_;
  std::vector<int> adj_;
  std::vector<int> best_;
};

}  // namespace

std::uint64_t canonical_hash(const MolGraph &graph) {
  const std::vector<int> cert = Canonicalizer(graph).certificate();
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (const int x: cert)
    h = hash_combine(h, static_cast<std::uint64_t>(x + 1));
  return h;
}

}  // namespace tflow
