//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/targetenc/encoder.h"

#include <cmath>
#include <map>
#include <random>
#include <string>

#include "tflow/error.h"
#include "tflow/kernels.h"

namespace tflow {

int amino_acid_index(char c) {
  const std::size_t pos = kAminoAcids.find(c);
  if (pos == std::string_view::npos)
    throw Error(Errc::kAlphabet,
                std::string("unknown amino-acid letter '") + c + "'");
  return static_cast<int>(pos);
}

namespace {

int kmer_space(int k) {
  if (k < 1 || k > 3)
    throw Error(Errc::kRange, "k-mer size must be 1, 2 or 3");
  int size = 1;
  for (int i = 0; i < k; ++i)
    size *= static_cast<int>(kAminoAcids.size());
  return size;
}

// Calls fn(kmer_index) for every window; validates the full sequence first.
template <typename Fn>
void for_each_kmer(std::string_view seq, int k, Fn fn) {
  std::vector<int> codes(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i)
    codes[i] = amino_acid_index(seq[i]);
  const int base = static_cast<int>(kAminoAcids.size());
  for (std::size_t i = 0; i + k <= codes.size(); ++i) {
    int idx = 0;
    for (int j = 0; j < k; ++j)
      idx = idx * base + codes[i + j];
    fn(idx);
  }
}

}  // namespace

std::vector<double> kmer_featurize(std::string_view seq, int k) {
  std::vector<double> counts(kmer_space(k), 0.0);
  for_each_kmer(seq, k, [&](int idx) { counts[idx] += 1.0; });
  return counts;
}

TargetEmbedding TargetEmbedding::from(std::vector<double> z) {
  TargetEmbedding e;
  double norm = 0.0;
  for (const double v: z)
    norm += v * v;
  norm = std::sqrt(norm);
  e.z_hat.assign(z.size(), 0.0);
  if (norm > 0.0) {
    for (std::size_t i = 0; i < z.size(); ++i)
      e.z_hat[i] = z[i] / norm;
  }
  e.z = std::move(z);
  return e;
}

TargetEncoder::TargetEncoder(ParamStore &store, const EncoderConfig &config,
                             Rng &rng)
    : config_(config), feature_dim_(kmer_space(config.k)) {
  if (config.hidden < 1 || config.out_dim < 1)
    throw Error(Errc::kShape, "encoder widths must be positive");
  const auto f = static_cast<std::size_t>(feature_dim_);
  const auto h = static_cast<std::size_t>(config.hidden);
  const auto d = static_cast<std::size_t>(config.out_dim);
  const bool tr = config.trainable;
  w1_ = store.add("encoder.w1", { f, h }, tr);
  b1_ = store.add("encoder.b1", { h }, tr);
  w2_ = store.add("encoder.w2", { d, h }, tr);
  b2_ = store.add("encoder.b2", { d }, tr);

  // Features have unit norm, so unit-variance first-layer weights give
  // unit-variance pre-activations.
  std::normal_distribution<double> first(0.0, 1.0);
  for (double &v: store.values(w1_))
    v = first(rng);
  std::normal_distribution<double> second(0.0, 1.0 / std::sqrt(double(h)));
  for (double &v: store.values(w2_))
    v = second(rng);
}

KmerFeatures TargetEncoder::featurize(std::string_view seq) const {
  KmerFeatures out;
  if (seq.size() > config_.max_length) {
    seq = seq.substr(0, config_.max_length);
    out.truncated = true;
  }
  std::map<int, double> counts;
  for_each_kmer(seq, config_.k, [&](int idx) { counts[idx] += 1.0; });
  double norm = 0.0;
  for (const auto &[idx, c]: counts)
    norm += c * c;
  norm = std::sqrt(norm);
  for (const auto &[idx, c]: counts) {
    out.index.push_back(idx);
    out.value.push_back(c / norm);
  }
  return out;
}

std::vector<double> TargetEncoder::encode(std::span<const double> theta,
                                          const KmerFeatures &features,
                                          Cache *cache) const {
  const int hdim = config_.hidden;
  const auto w1 = w1_.of(theta);
  std::vector<double> h(b1_.of(theta).begin(), b1_.of(theta).end());
  for (std::size_t n = 0; n < features.index.size(); ++n) {
    kernels::axpy(features.value[n],
                  w1.data() + static_cast<std::size_t>(features.index[n]) * hdim,
                  h.data(), hdim);
  }
  for (double &v: h)
    v = std::tanh(v);

  std::vector<double> z(b2_.of(theta).begin(), b2_.of(theta).end());
  kernels::gemv(w2_.of(theta).data(), config_.out_dim, hdim, h.data(),
                z.data());
  if (cache != nullptr) {
    cache->features = features;
    cache->h = std::move(h);
  }
  return z;
}

TargetEmbedding TargetEncoder::encode_target(std::span<const double> theta,
                                             std::string_view seq) const {
  return TargetEmbedding::from(encode(theta, featurize(seq)));
}

void TargetEncoder::backward(std::span<const double> theta, const Cache &cache,
                             std::span<const double> dz,
                             std::span<double> grad) const {
  if (!config_.trainable)
    return;
  const int hdim = config_.hidden;
  const int d = config_.out_dim;
  if (static_cast<int>(dz.size()) != d)
    throw Error(Errc::kShape, "encoder output gradient has the wrong size");
  if (static_cast<int>(cache.h.size()) != hdim)
    throw Error(Errc::kNoCache, "encoder backward without a forward cache");

  auto gb2 = b2_.of(grad);
  for (int i = 0; i < d; ++i)
    gb2[i] += dz[i];
  kernels::ger(1.0, dz.data(), d, cache.h.data(), hdim, w2_.of(grad).data());

  std::vector<double> dpre(hdim, 0.0);
  kernels::gemv_t(w2_.of(theta).data(), d, hdim, dz.data(), dpre.data());
  for (int j = 0; j < hdim; ++j)
    dpre[j] *= 1.0 - cache.h[j] * cache.h[j];

  auto gb1 = b1_.of(grad);
  for (int j = 0; j < hdim; ++j)
    gb1[j] += dpre[j];
  auto gw1 = w1_.of(grad);
  const KmerFeatures &f = cache.features;
  for (std::size_t n = 0; n < f.index.size(); ++n) {
    kernels::axpy(f.value[n], dpre.data(),
                  gw1.data() + static_cast<std::size_t>(f.index[n]) * hdim,
                  hdim);
  }
}

}  // namespace tflow
