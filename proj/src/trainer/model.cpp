//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/trainer/model.h"

#include <algorithm>
#include <charconv>
#include <string>

#include "tflow/error.h"
#include "tflow/rng.h"

namespace tflow {

std::string vocabulary_to_string(const Vocabulary &vocab) {
  std::string out;
  for (int i = 0; i < vocab.size(); ++i) {
    if (i > 0)
      out += ',';
    out += vocab[i].symbol + ":" + std::to_string(vocab[i].max_valence);
  }
  return out;
}

Vocabulary vocabulary_from_string(std::string_view text) {
  std::vector<Vocabulary::Element> elements;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view {}
                                           : text.substr(comma + 1);
    const auto colon = item.find(':');
    int valence = 0;
    if (colon == std::string_view::npos || colon == 0)
      throw Error(Errc::kFormat, "vocabulary entry '" + std::string(item)
                                     + "' is not SYMBOL:VALENCE");
    const auto digits = item.substr(colon + 1);
    const auto [end, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), valence);
    if (ec != std::errc() || end != digits.data() + digits.size())
      throw Error(Errc::kFormat, "vocabulary entry '" + std::string(item)
                                     + "' has a bad valence");
    elements.push_back({ std::string(item.substr(0, colon)), valence });
  }
  if (elements.empty())
    throw Error(Errc::kFormat, "empty vocabulary");
  return Vocabulary(std::move(elements));
}

ModelConfig ModelConfig::from_config(const Config &cfg) {
  ModelConfig m;
  if (cfg.has("molio.vocab"))
    m.vocab = vocabulary_from_string(cfg.get("molio.vocab", ""));
  GraphShape &s = m.flow.shape;
  s.max_atoms = static_cast<int>(cfg.get_int("molio.max_atoms", s.max_atoms));
  s.num_types = m.vocab.size();
  s.bond_types = static_cast<int>(cfg.get_int("molio.bond_types", s.bond_types));
  m.flow.bond_blocks =
      static_cast<int>(cfg.get_int("flow.bond_blocks", m.flow.bond_blocks));
  m.flow.atom_blocks =
      static_cast<int>(cfg.get_int("flow.atom_blocks", m.flow.atom_blocks));
  m.flow.bond_hidden =
      static_cast<int>(cfg.get_int("flow.bond_hidden", m.flow.bond_hidden));
  m.flow.atom_hidden =
      static_cast<int>(cfg.get_int("flow.atom_hidden", m.flow.atom_hidden));
  m.encoder.k = static_cast<int>(cfg.get_int("encoder.kmer", m.encoder.k));
  m.encoder.hidden =
      static_cast<int>(cfg.get_int("encoder.hidden", m.encoder.hidden));
  m.encoder.max_length = static_cast<std::size_t>(
      cfg.get_int("encoder.max_length", static_cast<long long>(m.encoder.max_length)));
  m.encoder.trainable = cfg.get_bool("encoder.trainable", m.encoder.trainable);
  m.encoder.out_dim = s.latent_dim();
  m.seed = static_cast<std::uint64_t>(cfg.get_int("model.seed", 0));
  if (s.max_atoms < 1 || s.bond_types < 1 || m.flow.bond_blocks < 0
      || m.flow.atom_blocks < 0 || m.flow.bond_hidden < 1
      || m.flow.atom_hidden < 1 || m.encoder.hidden < 1)
    throw Error(Errc::kRange, "model dimensions must be positive");
  return m;
}

Config ModelConfig::to_config() const {
  Config c;
  c.set("molio.vocab", vocabulary_to_string(vocab));
  c.set("molio.max_atoms", std::to_string(flow.shape.max_atoms));
  c.set("molio.bond_types", std::to_string(flow.shape.bond_types));
  c.set("flow.bond_blocks", std::to_string(flow.bond_blocks));
  c.set("flow.atom_blocks", std::to_string(flow.atom_blocks));
  c.set("flow.bond_hidden", std::to_string(flow.bond_hidden));
  c.set("flow.atom_hidden", std::to_string(flow.atom_hidden));
  c.set("encoder.kmer", std::to_string(encoder.k));
  c.set("encoder.hidden", std::to_string(encoder.hidden));
  c.set("encoder.max_length", std::to_string(encoder.max_length));
  c.set("encoder.trainable", encoder.trainable ? "true" : "false");
  c.set("model.seed", std::to_string(seed));
  return c;
}

std::uint64_t ModelConfig::digest() const {
  return fnv1a64(text());
}

namespace {

ModelConfig checked(ModelConfig config) {
  if (config.flow.shape.num_types != config.vocab.size())
    throw Error(Errc::kShape, "atom type count does not match the vocabulary");
  config.encoder.out_dim = config.flow.shape.latent_dim();
  return config;
}

}  // namespace

Model::Model(const ModelConfig &config): config_(checked(config)) {
  Rng rng(config_.seed);
  flow_ = MolecularFlow(store_, config_.flow, rng);
  flow_size_ = store_.size();
  encoder_ = TargetEncoder(store_, config_.encoder, rng);
  const auto d = static_cast<std::size_t>(latent_dim());
  sigma_ = store_.add("space.sigma", { d }, false);
  lambda_ = store_.add("space.lambda", { 1 }, false);
}

void Model::set_space(std::span<const double> sigma, double lambda) {
  if (sigma.size() != sigma_.size)
    throw Error(Errc::kShape, "space sigma does not match the latent size");
  if (!(lambda >= 0.0))
    throw Error(Errc::kRange, "space lambda must be non-negative");
  std::copy(sigma.begin(), sigma.end(), sigma_.of(theta()).begin());
  lambda_.of(theta())[0] = lambda;
}

}  // namespace tflow
