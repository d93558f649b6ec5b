//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_TRAINER_CHECKPOINT_H_
#define TFLOW_TRAINER_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tflow/trainer/model.h"
#include "tflow/trainer/trainer.h"

// Binary layout (all integers little-endian):
//
//   "SFLW"  u32 version  u64 config digest  u64 epoch
//   u32 length + config text
//   u64 tensor count, then per tensor:
//     u32 name length + name  u32 rank  u64 dims[rank]  f64 data[prod(dims)]
//
// Adam moments are stored as "adam.m/<name>" and "adam.v/<name>" tensors for
// every trainable parameter, plus a one-element "adam.steps" tensor.

namespace tflow {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TensorRecord {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> data;
};

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::uint64_t digest = 0;
  std::uint64_t epoch = 0;
  std::string config_text;
  std::vector<TensorRecord> tensors;

  const TensorRecord *find(std::string_view name) const;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint &ckpt);
// E_IO with the byte offset on truncation; E_FORMAT on a bad magic;
// E_VERSION on an unknown format version.
Checkpoint parse_checkpoint(const std::vector<std::uint8_t> &bytes);

void write_checkpoint(const Checkpoint &ckpt, const std::filesystem::path &path);
Checkpoint read_checkpoint(const std::filesystem::path &path);

// Snapshot of the model (and optimizer state when adam is non-null).
Checkpoint make_checkpoint(const Model &model, const Adam *adam,
                           std::uint64_t epoch);

// Copies tensors into an existing model. E_VERSION if the config digest,
// a tensor name or a shape does not match.
void restore_checkpoint(const Checkpoint &ckpt, Model &model, Adam *adam);

// Builds the model described by the checkpoint's config text and restores it.
Model model_from_checkpoint(const Checkpoint &ckpt);

}  // namespace tflow

#endif  // TFLOW_TRAINER_CHECKPOINT_H_
