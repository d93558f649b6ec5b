//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_TRAINER_TRAINER_H_
#define TFLOW_TRAINER_TRAINER_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tflow/molio/dataset.h"
#include "tflow/objectives/losses.h"
#include "tflow/rng.h"
#include "tflow/targetenc/encoder.h"
#include "tflow/trainer/model.h"

namespace tflow {

struct ObjectiveConfig {
  double lambda = 0.1;        // space variance factor
  double temperature = 2.0;   // Gaussian kernel t
  double align_weight = 1.0;
  double unif_weight = 1.0;
  double logdet_weight = 0.0; // optional -mean(logdet) regularizer
};

struct TrainConfig {
  double lr = 1e-3;
  int batch_size = 16;
  int epochs = 100;
  std::uint64_t seed = 0;
  double noise_scale = 0.4;
  double clip_norm = 10.0;
  int threads = 1;
  ObjectiveConfig objective;

  // Reads the [train] and [objective] keys.
  static TrainConfig from_config(const Config &cfg);
  Config to_config() const;
};

// Training pairs with targets deduplicated by id and featurized once.
struct TrainingSet {
  std::vector<std::string> target_ids;
  std::vector<std::string> sequences;
  std::vector<KmerFeatures> features;
  std::vector<MolGraph> graphs;
  std::vector<int> target_of;  // per pair, index into target_ids

  std::size_t size() const { return graphs.size(); }
  std::size_t num_targets() const { return target_ids.size(); }
};

TrainingSet build_training_set(const Model &model,
                               const std::vector<PairRecord> &records);

// One batch with all randomness drawn: dequantization noise and space noise
// are fixed here, so evaluate_batch is a deterministic function of theta.
// The space sigma is computed from the embeddings at preparation time and is
// treated as a constant when differentiating.
struct PreparedBatch {
  std::vector<int> targets;        // distinct target indices in the set
  std::vector<int> sample_target;  // per sample, index into `targets`
  Vectors atoms;
  Vectors bonds;
  Vectors bonds_onehot;
  Vectors eps;
  std::vector<double> sigma;

  std::size_t size() const { return atoms.size(); }
};

PreparedBatch prepare_batch(const Model &model, const TrainingSet &set,
                            std::span<const int> indices, double noise_scale,
                            double lambda, Rng &rng);

// Loss of a prepared batch at theta; accumulates dL/dtheta into grad when it
// is non-empty. E_BATCH_TOO_SMALL with fewer than two distinct targets.
LossReport evaluate_batch(const Model &model, std::span<const double> theta,
                          const TrainingSet &set, const PreparedBatch &batch,
                          const ObjectiveConfig &objective,
                          std::span<double> grad = {}, int threads = 1);

// Splits a permutation into batches; a trailing batch shorter than half the
// batch size is merged into the previous one.
std::vector<std::vector<int>> make_batches(const std::vector<int> &order,
                                           int batch_size);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over the trainable tensors of a ParamStore.
class Adam {
public:
  Adam() = default;
  explicit Adam(std::size_t n): m_(n, 0.0), v_(n, 0.0) { }

  // E_SHAPE if params/grad/moments differ in length.
  void step(const ParamStore &store, std::span<double> params,
            std::span<const double> grad, const AdamConfig &cfg);

  std::vector<double> &m() { return m_; }
  std::vector<double> &v() { return v_; }
  const std::vector<double> &m() const { return m_; }
  const std::vector<double> &v() const { return v_; }
  std::uint64_t steps() const { return steps_; }
  void set_steps(std::uint64_t s) { steps_ = s; }

private:
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t steps_ = 0;
};

// Scales grad in place so its L2 norm is at most max_norm; returns the norm
// before clipping.
double clip_global_norm(std::span<double> grad, double max_norm);

class Trainer {
public:
  Trainer(Model &model, TrainingSet set, TrainConfig config);

  // One pass over the set. Initializes actnorm from the first batch of the
  // first epoch. E_NONFINITE_LOSS aborts with the offending batch index.
  LossReport train_epoch();

  // Stores the population std of all target embeddings and the configured
  // lambda as the generation-time space parameters.
  void finalize_space();

  int epoch() const { return epoch_; }
  void set_epoch(int e) { epoch_ = e; }
  Adam &adam() { return adam_; }
  const Adam &adam() const { return adam_; }
  const TrainingSet &set() const { return set_; }
  const TrainConfig &config() const { return config_; }

private:
  Model &model_;
  TrainingSet set_;
  TrainConfig config_;
  Adam adam_;
  Rng rng_;
  int epoch_ = 0;
};

struct AuditEntry {
  std::string path;  // tensor name and flat index, e.g. "encoder.w1[12]"
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct AuditSection {
  std::size_t checked = 0;
  double max_rel_error = 0.0;
};

struct AuditReport {
  double tolerance = 0.0;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  AuditEntry worst;
  std::map<std::string, AuditSection> sections;  // keyed by tensor prefix
  std::vector<AuditEntry> failures;

  bool passed() const { return failures.empty(); }
};

struct AuditOptions {
  double tolerance = 1e-3;
  double step = 1e-4;
  // Gradients below this magnitude (both analytic and numeric) are compared
  // in absolute terms instead.
  double abs_floor = 1e-6;
  // Negates the analytic gradient of every tensor whose name starts with
  // this prefix (fault injection).
  std::string corrupt_prefix;
};

// Central finite differences of the total loss for every trainable scalar.
AuditReport audit_gradients(const Model &model, const TrainingSet &set,
                            const PreparedBatch &batch,
                            const ObjectiveConfig &objective,
                            const AuditOptions &options = {});

}  // namespace tflow

#endif  // TFLOW_TRAINER_TRAINER_H_
