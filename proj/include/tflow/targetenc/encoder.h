//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_TARGETENC_ENCODER_H_
#define TFLOW_TARGETENC_ENCODER_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tflow/flow/params.h"
#include "tflow/rng.h"

namespace tflow {

inline constexpr std::string_view kAminoAcids = "ACDEFGHIKLMNPQRSTVWY";

// Index of a canonical amino-acid letter in kAminoAcids; E_ALPHABET otherwise.
int amino_acid_index(char c);

// Dense k-mer count vector of length 20^k, k-mers in lexicographic order of
// kAminoAcids. E_ALPHABET on unknown letters, E_RANGE unless 1 <= k <= 3.
std::vector<double> kmer_featurize(std::string_view seq, int k);

// Sparse k-mer profile scaled to unit L2 norm (empty for sequences shorter
// than k), indices ascending.
struct KmerFeatures {
  std::vector<int> index;
  std::vector<double> value;
  bool truncated = false;  // sequence exceeded the length cap
};

// Target embedding and its projection onto the unit sphere.
struct TargetEmbedding {
  std::vector<double> z;
  std::vector<double> z_hat;  // z / |z|, or zeros when z = 0

  static TargetEmbedding from(std::vector<double> z);
};

struct EncoderConfig {
  int k = 3;
  int hidden = 256;
  int out_dim = 0;                   // must equal the flow latent dimension
  std::size_t max_length = 2000;     // residues kept before featurizing
  bool trainable = true;             // false freezes all encoder tensors
};

// k-mer profile -> affine(hidden) -> tanh -> affine(out_dim).
class TargetEncoder {
public:
  struct Cache {
    KmerFeatures features;
    std::vector<double> h;
  };

  TargetEncoder() = default;
  TargetEncoder(ParamStore &store, const EncoderConfig &config, Rng &rng);

  const EncoderConfig &config() const { return config_; }
  int feature_dim() const { return feature_dim_; }
  bool trainable() const { return config_.trainable; }

  KmerFeatures featurize(std::string_view seq) const;

  std::vector<double> encode(std::span<const double> theta,
                             const KmerFeatures &features,
                             Cache *cache = nullptr) const;
  TargetEmbedding encode_target(std::span<const double> theta,
                                std::string_view seq) const;

  // Accumulates dL/dtheta given dL/dz. No-op for a frozen encoder.
  void backward(std::span<const double> theta, const Cache &cache,
                std::span<const double> dz, std::span<double> grad) const;

  ParamRef w1_ref() const { return w1_; }
  ParamRef b1_ref() const { return b1_; }
  ParamRef w2_ref() const { return w2_; }
  ParamRef b2_ref() const { return b2_; }

private:
  EncoderConfig config_;
  int feature_dim_ = 0;
  ParamRef w1_;  // feature_dim x hidden (row per k-mer)
  ParamRef b1_;  // hidden
  ParamRef w2_;  // out_dim x hidden
  ParamRef b2_;  // out_dim
};

}  // namespace tflow

#endif  // TFLOW_TARGETENC_ENCODER_H_
