//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/trainer/trainer.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <thread>
#include <utility>

#include "tflow/error.h"
#include "tflow/kernels.h"
#include "tflow/molio/dequant.h"

namespace tflow {

TrainConfig TrainConfig::from_config(const Config &cfg) {
  TrainConfig t;
  t.lr = cfg.get_double("train.lr", t.lr);
  t.batch_size = static_cast<int>(cfg.get_int("train.batch_size", t.batch_size));
  t.epochs = static_cast<int>(cfg.get_int("train.epochs", t.epochs));
  t.seed = static_cast<std::uint64_t>(cfg.get_int("train.seed", 0));
  t.noise_scale = cfg.get_double("train.noise_scale", t.noise_scale);
  t.clip_norm = cfg.get_double("train.clip_norm", t.clip_norm);
  t.threads = static_cast<int>(cfg.get_int("train.threads", t.threads));
  ObjectiveConfig &o = t.objective;
  o.lambda = cfg.get_double("objective.lambda", o.lambda);
  o.temperature = cfg.get_double("objective.temperature", o.temperature);
  o.align_weight = cfg.get_double("objective.align_weight", o.align_weight);
  o.unif_weight = cfg.get_double("objective.unif_weight", o.unif_weight);
  o.logdet_weight = cfg.get_double("objective.logdet_weight", o.logdet_weight);
  if (!(t.lr >= 0.0) || t.batch_size < 2 || t.epochs < 0 || t.threads < 1
      || !(t.clip_norm > 0.0) || !(o.lambda >= 0.0) || !(o.temperature > 0.0))
    throw Error(Errc::kRange, "invalid training configuration");
  return t;
}

Config TrainConfig::to_config() const {
  Config c;
  c.set("train.lr", format_double(lr));
  c.set("train.batch_size", std::to_string(batch_size));
  c.set("train.epochs", std::to_string(epochs));
  c.set("train.seed", std::to_string(seed));
  c.set("train.noise_scale", format_double(noise_scale));
  c.set("train.clip_norm", format_double(clip_norm));
  c.set("train.threads", std::to_string(threads));
  c.set("objective.lambda", format_double(objective.lambda));
  c.set("objective.temperature", format_double(objective.temperature));
  c.set("objective.align_weight", format_double(objective.align_weight));
  c.set("objective.unif_weight", format_double(objective.unif_weight));
  c.set("objective.logdet_weight", format_double(objective.logdet_weight));
  return c;
}

TrainingSet build_training_set(const Model &model,
                               const std::vector<PairRecord> &records) {
  TrainingSet set;
  std::map<std::string, int> ids;
  for (const PairRecord &r: records) {
    if (!(r.graph.shape() == model.shape()))
      throw Error(Errc::kShape, "record graph shape differs from the model");
    auto [it, inserted] =
        ids.emplace(r.target_id, static_cast<int>(set.target_ids.size()));
    if (inserted) {
      set.target_ids.push_back(r.target_id);
      set.sequences.push_back(r.sequence);
      set.features.push_back(model.encoder().featurize(r.sequence));
    }
    set.graphs.push_back(r.graph);
    set.target_of.push_back(it->second);
  }
  return set;
}

PreparedBatch prepare_batch(const Model &model, const TrainingSet &set,
                            std::span<const int> indices, double noise_scale,
                            double lambda, Rng &rng) {
  PreparedBatch b;
  std::map<int, int> slot;
  for (const int i: indices) {
    const int t = set.target_of.at(i);
    auto [it, inserted] = slot.emplace(t, static_cast<int>(b.targets.size()));
    if (inserted)
      b.targets.push_back(t);
    b.sample_target.push_back(it->second);

    ContinuousGraph x = dequantize(set.graphs[i], noise_scale, rng);
    b.atoms.push_back(std::move(x.atoms));
    b.bonds.push_back(std::move(x.bonds));
    b.bonds_onehot.push_back(set.graphs[i].bonds_onehot());
  }

  Vectors z;
  for (const int t: b.targets) {
    z.push_back(model.encoder().encode(model.theta(), set.features[t]));
    if (!std::all_of(z.back().begin(), z.back().end(),
                     [](double v) { return std::isfinite(v); }))
      throw Error(Errc::kNonFinite,
                  "embedding of target '" + set.target_ids[t] + "' is not finite");
  }
  b.sigma = batch_std(z);
  for (std::size_t s = 0; s < b.size(); ++s)
    b.eps.push_back(space_noise(b.sigma, lambda, rng));
  return b;
}

namespace {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)> &fn) {
  const auto t = static_cast<std::size_t>(std::max(1, threads));
  if (t == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  std::vector<std::exception_ptr> errors(t);
  for (std::size_t w = 0; w < std::min(t, n); ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += t)
          fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto &e: errors) {
    if (e)
      std::rethrow_exception(e);
  }
}

}  // namespace

LossReport evaluate_batch(const Model &model, std::span<const double> theta,
                          const TrainingSet &set, const PreparedBatch &batch,
                          const ObjectiveConfig &objective,
                          std::span<double> grad, int threads) {
  const std::size_t n = batch.size();
  if (n == 0)
    throw Error(Errc::kEmpty, "empty batch");
  if (batch.targets.size() < 2)
    throw Error(Errc::kBatchTooSmall,
                "batch holds a single distinct target; uniformity undefined");
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != theta.size())
    throw Error(Errc::kShape, "gradient buffer does not match the parameters");

  const TargetEncoder &enc = model.encoder();
  const MolecularFlow &flow = model.flow();

  // Target embeddings.
  const std::size_t nt = batch.targets.size();
  Vectors z(nt);
  std::vector<TargetEncoder::Cache> enc_cache(nt);
  for (std::size_t u = 0; u < nt; ++u)
    z[u] = enc.encode(theta, set.features[batch.targets[u]], &enc_cache[u]);

  // Molecule embeddings.
  std::vector<MolecularFlow::Cache> flow_cache(n);
  std::vector<LatentPair> latent(n);
  std::vector<double> logdet(n);
  parallel_for(n, threads, [&](std::size_t s) {
    logdet[s] = flow.forward(theta, batch.atoms[s], batch.bonds[s],
                             batch.bonds_onehot[s], latent[s],
                             want_grad ? &flow_cache[s] : nullptr);
  });

  Vectors anchors(n), zm(n);
  for (std::size_t s = 0; s < n; ++s) {
    zm[s] = latent[s].concat();
    anchors[s] = z[batch.sample_target[s]];
    for (std::size_t i = 0; i < anchors[s].size(); ++i)
      anchors[s][i] += batch.eps[s][i];
  }

  const AlignResult align = align_loss(anchors, zm);
  const UnifResult unif = unif_loss(z, objective.temperature);
  LossReport report = total_loss(align.value, unif.value,
                                 { objective.align_weight, objective.unif_weight });
  report.logdet = std::accumulate(logdet.begin(), logdet.end(), 0.0) / n;
  report.total -= objective.logdet_weight * report.logdet;
  report.min_pair_distance = unif.min_pair_distance;
  for (const auto &v: z)
    report.mean_norm += std::sqrt(kernels::dot(v.data(), v.data(), v.size())) / nt;

  if (!want_grad)
    return report;

  // Per-sample flow gradients, summed in sample order for determinism.
  const std::size_t fsize = model.flow_size();
  const GraphShape &shape = model.shape();
  const double dlogdet = -objective.logdet_weight / static_cast<double>(n);
  std::vector<std::vector<double>> sample_grad(n);
  parallel_for(n, threads, [&](std::size_t s) {
    sample_grad[s].assign(fsize, 0.0);
    LatentPair dz = LatentPair::split(align.grad_latent[s], shape);
    for (double &v: dz.atoms)
      v *= objective.align_weight;
    for (double &v: dz.bonds)
      v *= objective.align_weight;
    flow.backward(theta, flow_cache[s], dz, dlogdet,
                  std::span<double>(sample_grad[s]));
  });
  for (std::size_t s = 0; s < n; ++s)
    kernels::axpy(1.0, sample_grad[s].data(), grad.data(), fsize);

  // Target side: the anchor enters the distance with the opposite sign.
  Vectors dz(nt, std::vector<double>(z.front().size(), 0.0));
  for (std::size_t s = 0; s < n; ++s)
    kernels::axpy(-objective.align_weight, align.grad_latent[s].data(),
                  dz[batch.sample_target[s]].data(), dz.front().size());
  for (std::size_t u = 0; u < nt; ++u) {
    kernels::axpy(objective.unif_weight, unif.grad[u].data(), dz[u].data(),
                  dz[u].size());
    enc.backward(theta, enc_cache[u], dz[u], grad);
  }
  return report;
}

std::vector<std::vector<int>> make_batches(const std::vector<int> &order,
                                           int batch_size) {
  if (batch_size < 1)
    throw Error(Errc::kRange, "batch size must be positive");
  std::vector<std::vector<int>> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    const std::size_t end = std::min(order.size(), i + batch_size);
    std::vector<int> b(order.begin() + i, order.begin() + end);
    if (!batches.empty() && 2 * b.size() < static_cast<std::size_t>(batch_size))
      batches.back().insert(batches.back().end(), b.begin(), b.end());
    else
      batches.push_back(std::move(b));
  }
  return batches;
}

void Adam::step(const ParamStore &store, std::span<double> params,
                std::span<const double> grad, const AdamConfig &cfg) {
  if (params.size() != store.size() || grad.size() != store.size()
      || m_.size() != store.size() || v_.size() != store.size())
    throw Error(Errc::kShape, "Adam buffers differ in length");
  ++steps_;
  const double t = static_cast<double>(steps_);
  const kernels::AdamCoeffs c { cfg.lr,
                                cfg.beta1,
                                cfg.beta2,
                                cfg.eps,
                                1.0 / (1.0 - std::pow(cfg.beta1, t)),
                                1.0 / (1.0 - std::pow(cfg.beta2, t)) };
  for (const auto &e: store.entries()) {
    if (!e.trainable)
      continue;
    const std::size_t o = e.ref.offset;
    kernels::active().adam(params.data() + o, grad.data() + o, m_.data() + o,
                           v_.data() + o, e.ref.size, c);
  }
}

double clip_global_norm(std::span<double> grad, double max_norm) {
  const double norm = std::sqrt(kernels::dot(grad.data(), grad.data(), grad.size()));
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (double &g: grad)
      g *= s;
  }
  return norm;
}

Trainer::Trainer(Model &model, TrainingSet set, TrainConfig config)
    : model_(model), set_(std::move(set)), config_(std::move(config)),
      adam_(model.params().size()), rng_(config_.seed) {
  if (set_.size() == 0)
    throw Error(Errc::kEmpty, "training set is empty");
}

LossReport Trainer::train_epoch() {
  std::vector<int> order(set_.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng_);
  const auto batches = make_batches(order, config_.batch_size);

  if (!model_.initialized()) {
    Vectors bonds;
    for (const int i: batches.front())
      bonds.push_back(dequantize(set_.graphs[i], config_.noise_scale, rng_).bonds);
    model_.flow().bond_flow().initialize(model_.theta(), bonds);
  }

  const AdamConfig adam_cfg { config_.lr };
  const ObjectiveConfig &obj = config_.objective;
  std::vector<double> grad(model_.params().size());
  LossReport mean;
  double seen = 0.0;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    std::fill(grad.begin(), grad.end(), 0.0);
    LossReport r;
    const std::size_t batch_size = batches[b].size();
    try {
      const PreparedBatch batch = prepare_batch(model_, set_, batches[b],
                                                config_.noise_scale, obj.lambda,
                                                rng_);
      r = evaluate_batch(model_, model_.theta(), set_, batch, obj, grad,
                         config_.threads);
    } catch (const Error &e) {
      if (e.code() != Errc::kNonFinite)
        throw;
      r.total = std::nan("");
    }
    const bool grad_ok = std::all_of(grad.begin(), grad.end(),
                                     [](double g) { return std::isfinite(g); });
    if (!std::isfinite(r.total) || !grad_ok)
      throw Error(Errc::kNonFiniteLoss,
                  "epoch " + std::to_string(epoch_) + ", batch "
                      + std::to_string(b) + ": align=" + format_double(r.align)
                      + " unif=" + format_double(r.unif)
                      + (grad_ok ? "" : " (non-finite gradient)"));
    clip_global_norm(grad, config_.clip_norm);
    adam_.step(model_.params(), model_.theta(), grad, adam_cfg);

    const double w = static_cast<double>(batch_size);
    mean.align += w * r.align;
    mean.unif += w * r.unif;
    mean.total += w * r.total;
    mean.logdet += w * r.logdet;
    mean.mean_norm += w * r.mean_norm;
    mean.min_pair_distance += w * r.min_pair_distance;
    seen += w;
  }
  mean.align /= seen;
  mean.unif /= seen;
  mean.total /= seen;
  mean.logdet /= seen;
  mean.mean_norm /= seen;
  mean.min_pair_distance /= seen;
  ++epoch_;
  return mean;
}

void Trainer::finalize_space() {
  Vectors z;
  for (const auto &f: set_.features)
    z.push_back(model_.encoder().encode(model_.theta(), f));
  model_.set_space(batch_std(z), config_.objective.lambda);
}

AuditReport audit_gradients(const Model &model, const TrainingSet &set,
                            const PreparedBatch &batch,
                            const ObjectiveConfig &objective,
                            const AuditOptions &options) {
  std::vector<double> theta(model.theta().begin(), model.theta().end());
  std::vector<double> grad(theta.size(), 0.0);
  evaluate_batch(model, theta, set, batch, objective, grad);

  AuditReport report;
  report.tolerance = options.tolerance;
  const double h = options.step;
  for (const auto &e: model.params().entries()) {
    if (!e.trainable)
      continue;
    const bool corrupt = !options.corrupt_prefix.empty()
                         && e.name.starts_with(options.corrupt_prefix);
    const std::string section = e.name.substr(0, e.name.find('.'));
    AuditSection &sec = report.sections[section];
    for (std::size_t k = 0; k < e.ref.size; ++k) {
      const std::size_t i = e.ref.offset + k;
      const double saved = theta[i];
      theta[i] = saved + h;
      const double up = evaluate_batch(model, theta, set, batch, objective).total;
      theta[i] = saved - h;
      const double down =
          evaluate_batch(model, theta, set, batch, objective).total;
      theta[i] = saved;

      AuditEntry entry;
      entry.path = e.name + "[" + std::to_string(k) + "]";
      entry.analytic = corrupt ? -grad[i] : grad[i];
      entry.numeric = (up - down) / (2.0 * h);
      const double diff = std::abs(entry.analytic - entry.numeric);
      const double scale = std::max(std::abs(entry.analytic), std::abs(entry.numeric));
      entry.rel_error = scale > options.abs_floor ? diff / scale : 0.0;
      const bool ok = scale > options.abs_floor ? entry.rel_error <= options.tolerance
                                                : diff <= options.abs_floor;

      ++sec.checked;
      ++report.checked;
      sec.max_rel_error = std::max(sec.max_rel_error, entry.rel_error);
      if (entry.rel_error >= report.max_rel_error) {
        report.max_rel_error = entry.rel_error;
        report.worst = entry;
      }
      if (!ok)
        report.failures.push_back(std::move(entry));
    }
  }
  return report;
}

}  // namespace tflow
