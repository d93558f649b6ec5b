//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_TRAINER_MODEL_H_
#define TFLOW_TRAINER_MODEL_H_

#include <cstdint>
#include <span>
#include <string>

#include "tflow/config.h"
#include "tflow/flow/flows.h"
#include "tflow/flow/params.h"
#include "tflow/molio/molgraph.h"
#include "tflow/targetenc/encoder.h"

namespace tflow {

// Everything that fixes the parameter layout. Serialized into checkpoints;
// its digest guards against loading parameters into a different model.
struct ModelConfig {
  FlowConfig flow;
  Vocabulary vocab = Vocabulary::default_vocabulary();
  EncoderConfig encoder;  // out_dim is derived from the flow shape
  std::uint64_t seed = 0;

  // Reads the [model], [flow], [encoder] and [molio] keys.
  static ModelConfig from_config(const Config &cfg);
  Config to_config() const;
  std::string text() const { return to_config().to_text(); }
  std::uint64_t digest() const;
};

// "C:4,N:3,..." and back. E_FORMAT on malformed text.
std::string vocabulary_to_string(const Vocabulary &vocab);
Vocabulary vocabulary_from_string(std::string_view text);

// Flow and encoder parameters in one store, plus the generation-time space
// parameters (non-trainable). Flow tensors come first so that per-sample
// flow gradients can be accumulated in buffers of flow_size() entries.
class Model {
public:
  explicit Model(const ModelConfig &config);

  const ModelConfig &config() const { return config_; }
  const GraphShape &shape() const { return config_.flow.shape; }
  int latent_dim() const { return shape().latent_dim(); }

  ParamStore &params() { return store_; }
  const ParamStore &params() const { return store_; }
  std::span<double> theta() { return store_.values(); }
  std::span<const double> theta() const { return store_.values(); }

  const MolecularFlow &flow() const { return flow_; }
  const TargetEncoder &encoder() const { return encoder_; }

  std::size_t flow_size() const { return flow_size_; }
  bool initialized() const { return flow_.bond_flow().initialized(theta()); }

  std::span<const double> space_sigma() const {
    return sigma_.of(theta());
  }
  double space_lambda() const { return lambda_.of(theta())[0]; }
  void set_space(std::span<const double> sigma, double lambda);

private:
  ModelConfig config_;
  ParamStore store_;
  MolecularFlow flow_;
  std::size_t flow_size_ = 0;
  TargetEncoder encoder_;
  ParamRef sigma_;
  ParamRef lambda_;
};

}  // namespace tflow

#endif  // TFLOW_TRAINER_MODEL_H_
