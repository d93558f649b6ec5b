//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/cli/app.h"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tflow/chem/chem.h"
#include "tflow/cli/synthetic.h"
#include "tflow/error.h"
#include "tflow/kernels.h"
#include "tflow/molio/dataset.h"
#include "tflow/molio/dequant.h"
#include "tflow/molio/smiles.h"
#include "tflow/rng.h"
#include "tflow/sampler/sampler.h"
#include "tflow/trainer/checkpoint.h"
#include "tflow/trainer/model.h"
#include "tflow/trainer/trainer.h"

namespace tflow {

namespace fs = std::filesystem;
using nlohmann::json;

Config default_run_config() {
  Config c = ModelConfig().to_config();
  c.merge(TrainConfig().to_config());
  c.set("eval.fingerprint_radius", std::to_string(kDefaultFingerprintRadius));
  c.set("eval.fingerprint_width", std::to_string(kDefaultFingerprintWidth));
  return c;
}

void emit_density_data(const MetricsReport &report, const fs::path &path) {
  std::ofstream os(path);
  if (!os)
    throw Error(Errc::kIo, "cannot write '" + path.string() + "'");
  os << "metric_name,value\n";
  char buf[64];
  for (const MoleculeRow &row: report.rows) {
    if (!row.nn_tanimoto)
      continue;
    std::snprintf(buf, sizeof buf, "%.17g", *row.nn_tanimoto);
    os << "nn_tanimoto," << buf << '\n';
  }
  if (!os)
    throw Error(Errc::kIo, "short write to '" + path.string() + "'");
}

namespace {

// Thrown for bad command lines and settings; maps to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string hex64(std::uint64_t x) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << x;
  return ss.str();
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(Errc::kIo, "cannot open '" + path.string() + "'");
  return { std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>() };
}

std::ofstream open_out(const fs::path &path) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw Error(Errc::kIo, "cannot write '" + path.string() + "'");
  return os;
}

void write_json(const fs::path &path, const json &doc) {
  std::ofstream os = open_out(path);
  os << doc.dump(2) << '\n';
}

// Defaults, then the config file, then `--section.key value` overrides.
// Unknown keys are usage errors.
Config resolve_config(const std::string &file,
                      const std::vector<std::string> &extras,
                      const Config &base = default_run_config()) {
  Config cfg = base;
  const Config known = default_run_config();
  auto check = [&](const std::string &key) {
    if (!known.has(key))
      throw UsageError("unknown setting '" + key + "'");
  };
  if (!file.empty()) {
    const Config fromfile = Config::load(file);
    for (const auto &[k, v]: fromfile.values())
      check(k);
    cfg.merge(fromfile);
  }
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string arg = extras[i];
    if (arg.rfind("--", 0) != 0)
      throw UsageError("unexpected argument '" + arg + "'");
    arg = arg.substr(2);
    std::string value;
    if (const auto eq = arg.find('='); eq != std::string::npos) {
      value = arg.substr(eq + 1);
      arg = arg.substr(0, eq);
    } else {
      if (i + 1 >= extras.size())
        throw UsageError("setting '--" + arg + "' needs a value");
      value = extras[++i];
    }
    check(arg);
    cfg.set(arg, value);
  }
  return cfg;
}

struct Resolved {
  Config cfg;
  ModelConfig model;
  TrainConfig train;
  MetricsOptions metrics;
};

Resolved resolve(const Config &cfg) {
  Resolved r { cfg, ModelConfig::from_config(cfg), TrainConfig::from_config(cfg),
               {} };
  r.metrics.fingerprint_radius =
      static_cast<int>(cfg.get_int("eval.fingerprint_radius", kDefaultFingerprintRadius));
  r.metrics.fingerprint_width =
      static_cast<int>(cfg.get_int("eval.fingerprint_width", kDefaultFingerprintWidth));
  return r;
}

json manifest(const std::string &command, const Config &cfg,
              std::uint64_t seed) {
  return { { "command", command },
           { "config", cfg.to_text() },
           { "seed", seed },
           { "kernels", std::string(kernels::active().name) } };
}

std::vector<PairRecord> select_split(const PairDataset &data,
                                     const std::string &split) {
  if (split == "all")
    return data.records;
  for (const Split s: { Split::kTrain, Split::kValid, Split::kTest }) {
    if (split == split_name(s))
      return data.subset(s);
  }
  throw UsageError("unknown split '" + split + "' (train|valid|test|all)");
}

// SMILES of a possibly disconnected graph: components joined by '.', which
// the reader rejects, so such lines evaluate as invalid.
std::string graph_text(const MolGraph &g, const Vocabulary &vocab) {
  std::string out;
  const auto comps = g.components();
  for (std::size_t c = 0; c < comps.size(); ++c) {
    MolGraph part(g.shape());
    for (const int i: comps[c])
      part.set_atom(i, g.atom(i));
    for (const int i: comps[c]) {
      for (const int j: comps[c]) {
        if (i < j)
          part.set_bond(i, j, g.bond(i, j));
      }
    }
    if (c > 0)
      out += '.';
    out += write_smiles(part, vocab);
  }
  return out;
}

// SMILES lines (or TSV lines, last column) into graphs; '#' lines skipped.
struct SmilesColumn {
  std::vector<std::string> text;
  std::vector<int> line;
};

SmilesColumn read_smiles_column(const fs::path &path) {
  std::istringstream in(read_file(path));
  SmilesColumn col;
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line[0] == '#')
      continue;
    const auto tab = line.rfind('\t');
    col.text.push_back(tab == std::string::npos ? line : line.substr(tab + 1));
    col.line.push_back(no);
  }
  return col;
}

// ---------------------------------------------------------------------------

int cmd_ingest(const Resolved &r, const std::string &data_path,
               std::ostream &out) {
  const PairDataset data =
      load_pairs(data_path, r.model.flow.shape, r.model.vocab);
  std::set<std::uint64_t> molecules;
  std::size_t truncated = 0;
  int max_atoms = 0;
  for (const PairRecord &rec: data.records) {
    molecules.insert(canonical_hash(rec.graph));
    max_atoms = std::max(max_atoms, rec.graph.n_heavy());
    truncated += rec.sequence.size() > r.model.encoder.max_length ? 1 : 0;
  }
  json splits = json::object();
  for (const Split s: { Split::kTrain, Split::kValid, Split::kTest })
    splits[std::string(split_name(s))] = data.indices(s).size();
  const json doc = { { "records", data.records.size() },
                     { "targets", data.target_ids().size() },
                     { "distinct_molecules", molecules.size() },
                     { "max_heavy_atoms", max_atoms },
                     { "truncated_sequences", truncated },
                     { "splits", splits } };
  out << doc.dump(2) << '\n';
  return kExitOk;
}

int cmd_train(const Resolved &r, const std::string &data_path,
              const fs::path &out_dir, const std::string &split,
              std::ostream &out, std::ostream &err) {
  const PairDataset data =
      load_pairs(data_path, r.model.flow.shape, r.model.vocab);
  Model model(r.model);
  TrainingSet set = build_training_set(model, select_split(data, split));
  for (const KmerFeatures &f: set.features) {
    if (f.truncated)
      err << "warning: a sequence was truncated to " << r.model.encoder.max_length
          << " residues\n";
  }
  err << "training on " << set.size() << " pairs, " << set.num_targets()
      << " targets, " << model.params().size() << " parameters\n";

  fs::create_directories(out_dir);
  std::ofstream loss = open_out(out_dir / "loss.csv");
  loss << "epoch,align,unif,total\n";
  Trainer trainer(model, std::move(set), r.train);
  char buf[160];
  for (int e = 0; e < r.train.epochs; ++e) {
    const LossReport rep = trainer.train_epoch();
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", e + 1, rep.align,
                  rep.unif, rep.total);
    loss << buf;
    if ((e + 1) % 10 == 0 || e + 1 == r.train.epochs)
      err << "epoch " << (e + 1) << ": total " << rep.total << '\n';
  }
  trainer.finalize_space();

  const fs::path ckpt_path = out_dir / "model.ckpt";
  const Checkpoint ckpt =
      make_checkpoint(model, &trainer.adam(), static_cast<std::uint64_t>(trainer.epoch()));
  const auto bytes = serialize_checkpoint(ckpt);
  write_checkpoint(ckpt, ckpt_path);

  json doc = manifest("train", r.cfg, r.train.seed);
  doc["data"] = data_path;
  doc["split"] = split;
  doc["checkpoint"] = ckpt_path.string();
  doc["checkpoint_digest"] =
      hex64(fnv1a64(std::string_view(reinterpret_cast<const char *>(bytes.data()),
                                     bytes.size())));
  doc["outputs"] = { (out_dir / "loss.csv").string(), ckpt_path.string() };
  write_json(out_dir / "manifest.json", doc);
  out << ckpt_path.string() << '\n';
  return kExitOk;
}

struct GenerateArgs {
  std::string checkpoint;
  std::string sequence;
  std::string data;
  std::string split = "all";
  std::string out;
  int n = 10;
  std::optional<double> lambda;
  std::uint64_t seed = 0;
  bool tsv = false;
  bool no_correct = false;
};

int cmd_generate(const GenerateArgs &a, std::ostream &out, std::ostream &err) {
  const auto bytes_text = read_file(a.checkpoint);
  const Checkpoint ckpt = parse_checkpoint(
      std::vector<std::uint8_t>(bytes_text.begin(), bytes_text.end()));
  const Model model = model_from_checkpoint(ckpt);
  const Vocabulary &vocab = model.config().vocab;

  std::vector<std::pair<std::string, std::string>> targets;
  if (!a.sequence.empty()) {
    targets.emplace_back("query", a.sequence);
  } else if (!a.data.empty()) {
    const PairDataset data =
        load_pairs(a.data, model.shape(), model.config().vocab);
    std::set<std::string> seen;
    for (const PairRecord &rec: select_split(data, a.split)) {
      if (seen.insert(rec.target_id).second)
        targets.emplace_back(rec.target_id, rec.sequence);
    }
  } else {
    throw UsageError("generate needs --sequence or --data");
  }

  std::ofstream file;
  if (!a.out.empty())
    file = open_out(a.out);
  std::ostream &os = a.out.empty() ? out : file;
  std::size_t total = 0, raw_valid = 0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    GenerationRequest req { targets[t].second, a.n, a.lambda,
                            hash_combine(a.seed, t), !a.no_correct };
    const auto mols = generate(model, req);
    for (std::size_t s = 0; s < mols.size(); ++s) {
      ++total;
      raw_valid += mols[s].raw_valid ? 1 : 0;
      const std::string smi = graph_text(mols[s].graph, vocab);
      if (a.tsv)
        os << targets[t].first << '\t' << s << '\t' << smi << '\n';
      else
        os << smi << '\n';
    }
  }
  const double before = total == 0 ? 0.0 : 100.0 * raw_valid / total;
  err << "generated " << total << " molecules for " << targets.size()
      << " targets; validity before correction " << before << "%\n";

  if (!a.out.empty()) {
    json doc = manifest("generate", model.config().to_config(), a.seed);
    doc["checkpoint"] = a.checkpoint;
    doc["checkpoint_digest"] = hex64(fnv1a64(bytes_text));
    doc["samples_per_target"] = a.n;
    doc["lambda"] = a.lambda.value_or(model.space_lambda());
    doc["corrected"] = !a.no_correct;
    doc["validity_before_correction"] = before;
    doc["outputs"] = { a.out };
    write_json(a.out + ".manifest.json", doc);
  }
  return kExitOk;
}

int cmd_eval(const Resolved &r, const std::string &generated,
             const std::string &reference, const std::string &json_path,
             const std::string &csv_path, const std::string &density_path,
             std::ostream &out) {
  const GraphShape &shape = r.model.flow.shape;
  const Vocabulary &vocab = r.model.vocab;
  std::vector<MolGraph> gen, ref;
  for (const std::string &smi: read_smiles_column(generated).text) {
    try {
      gen.push_back(parse_smiles(smi, shape, vocab));
    } catch (const Error &) {
      gen.emplace_back(shape);  // unparseable: counted as invalid
    }
  }
  const SmilesColumn refs = read_smiles_column(reference);
  for (std::size_t i = 0; i < refs.text.size(); ++i) {
    try {
      ref.push_back(parse_smiles(refs.text[i], shape, vocab));
    } catch (const Error &e) {
      throw Error(e.code(), reference + ":" + std::to_string(refs.line[i]) + ": "
                                + e.what());
    }
  }
  const MetricsReport report = evaluate(gen, ref, vocab, r.metrics);
  json doc = to_json(report);
  if (json_path.empty()) {
    out << doc.dump(2) << '\n';
  } else {
    write_json(json_path, doc);
    json m = manifest("eval", r.cfg, 0);
    m["generated"] = generated;
    m["reference"] = reference;
    m["generated_digest"] = hex64(fnv1a64(read_file(generated)));
    m["outputs"] = { json_path };
    write_json(json_path + ".manifest.json", m);
  }
  if (!csv_path.empty()) {
    std::ofstream os = open_out(csv_path);
    write_rows_csv(os, report);
  }
  if (!density_path.empty())
    emit_density_data(report, density_path);
  return kExitOk;
}

// Small model used by `audit` unless the settings say otherwise.
Config audit_defaults() {
  Config c = default_run_config();
  c.set("molio.vocab", "C:4,N:3");
  c.set("molio.max_atoms", "3");
  c.set("molio.bond_types", "2");
  c.set("flow.bond_blocks", "1");
  c.set("flow.atom_blocks", "2");
  c.set("flow.bond_hidden", "4");
  c.set("flow.atom_hidden", "3");
  c.set("encoder.kmer", "1");
  c.set("encoder.hidden", "4");
  return c;
}

int cmd_audit(const Resolved &r, double tolerance, double jitter,
              const std::string &corrupt, std::ostream &out) {
  Model model(r.model);
  SyntheticOptions so;
  so.pairs = 8;
  so.multiplicity = 2;
  so.sequence_length = 12;
  so.min_atoms = 1;
  so.seed = r.train.seed;
  const PairDataset data = make_synthetic(so, model.shape(), model.config().vocab);
  const TrainingSet set = build_training_set(model, data.records);

  Rng rng(hash_combine(r.train.seed, 0xa0d17));
  std::vector<int> all(set.size());
  std::iota(all.begin(), all.end(), 0);
  Vectors bonds;
  for (const int i: all)
    bonds.push_back(dequantize(set.graphs[i], r.train.noise_scale, rng).bonds);
  model.flow().bond_flow().initialize(model.theta(), bonds);
  if (jitter > 0.0) {
    std::normal_distribution<double> normal(0.0, jitter);
    for (const auto &e: model.params().entries()) {
      if (e.trainable) {
        for (double &v: e.ref.of(model.theta()))
          v += normal(rng);
      }
    }
  }
  const PreparedBatch batch = prepare_batch(model, set, all, r.train.noise_scale,
                                            r.train.objective.lambda, rng);
  AuditOptions opts;
  opts.tolerance = tolerance;
  opts.corrupt_prefix = corrupt;
  const AuditReport rep =
      audit_gradients(model, set, batch, r.train.objective, opts);

  json sections = json::object();
  for (const auto &[name, s]: rep.sections)
    sections[name] = { { "checked", s.checked }, { "max_rel_error", s.max_rel_error } };
  json failures = json::array();
  for (const AuditEntry &f: rep.failures)
    failures.push_back({ { "path", f.path },
                         { "analytic", f.analytic },
                         { "numeric", f.numeric },
                         { "rel_error", f.rel_error } });
  const json doc = { { "passed", rep.passed() },
                     { "tolerance", rep.tolerance },
                     { "checked", rep.checked },
                     { "max_rel_error", rep.max_rel_error },
                     { "worst", rep.worst.path },
                     { "sections", sections },
                     { "failures", failures } };
  out << doc.dump(2) << '\n';
  return rep.passed() ? kExitOk : kExitNumerical;
}

int cmd_make_synthetic(const Resolved &r, const SyntheticOptions &so,
                       const std::string &out_path, std::ostream &out) {
  const PairDataset data = make_synthetic(so, r.model.flow.shape, r.model.vocab);
  if (out_path.empty()) {
    write_pairs(out, data);
  } else {
    std::ofstream os = open_out(out_path);
    write_pairs(os, data);
  }
  return kExitOk;
}

int exit_code_for(Errc code) {
  switch (code) {
  case Errc::kNonFinite:
  case Errc::kNonFiniteLoss:
  case Errc::kSingular:
  case Errc::kZeroScale:
    return kExitNumerical;
  default:
    return kExitData;
  }
}

}  // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err) {
  CLI::App app { "Target-conditioned molecular graph flows", "tflow" };
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "INI settings file")
      ->check(CLI::ExistingFile);

  auto with_overrides = [](CLI::App *sub) {
    sub->allow_extras();
    sub->footer("Any setting can be overridden with --section.key value.");
    return sub;
  };

  std::string data, out_path, split = "train";
  auto *ingest = with_overrides(app.add_subcommand("ingest", "Validate and summarize a dataset"));
  ingest->add_option("--data", data, "TSV dataset")->required();

  int threads = 0;
  auto *train = with_overrides(app.add_subcommand("train", "Train a model"));
  train->add_option("--data", data, "TSV dataset")->required();
  train->add_option("--out", out_path, "Output directory")->required();
  train->add_option("--split", split, "train|valid|test|all");
  train->add_option("--threads", threads, "Worker threads (1 = deterministic)");

  GenerateArgs gen;
  double lambda = -1.0;
  auto *generate = app.add_subcommand("generate", "Sample molecules for targets");
  generate->add_option("--checkpoint", gen.checkpoint)->required();
  generate->add_option("--sequence", gen.sequence, "Single target sequence");
  generate->add_option("--data", gen.data, "Dataset whose targets to use");
  generate->add_option("--split", gen.split, "train|valid|test|all");
  generate->add_option("--n", gen.n, "Samples per target");
  generate->add_option("--lambda", lambda, "Space variance factor override");
  generate->add_option("--seed", gen.seed);
  generate->add_option("--out", gen.out, "Output file (default stdout)");
  generate->add_flag("--tsv", gen.tsv, "Write target_id, sample_index, SMILES");
  generate->add_flag("--no-correct", gen.no_correct, "Skip validity correction");

  std::string generated, reference, json_path, csv_path, density_path;
  auto *eval = with_overrides(app.add_subcommand("eval", "Score generated molecules"));
  eval->add_option("--generated", generated)->required();
  eval->add_option("--reference", reference, "Training molecules")->required();
  eval->add_option("--json", json_path, "Report JSON (default stdout)");
  eval->add_option("--csv", csv_path, "Per-molecule rows");
  eval->add_option("--density", density_path, "metric_name,value CSV");

  double tolerance = 1e-3, jitter = 0.1;
  std::string corrupt;
  auto *audit = with_overrides(app.add_subcommand("audit", "Finite-difference gradient audit"));
  audit->add_option("--tolerance", tolerance);
  audit->add_option("--jitter", jitter, "Std of noise added to parameters first");
  audit->add_option("--corrupt", corrupt, "Negate gradients of tensors with this prefix");

  SyntheticOptions so;
  auto *synth = with_overrides(app.add_subcommand("make-synthetic", "Write the synthetic dataset"));
  synth->add_option("--pairs", so.pairs);
  synth->add_option("--multiplicity", so.multiplicity);
  synth->add_option("--length", so.sequence_length, "Sequence length");
  synth->add_option("--seed", so.seed);
  synth->add_option("--out", out_path, "Output file (default stdout)");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    CLI::App *sub = app.get_subcommands().front();
    const std::vector<std::string> extras =
        sub->get_allow_extras() ? sub->remaining() : std::vector<std::string> {};
    const Config base = sub == audit ? audit_defaults() : default_run_config();
    Config cfg = resolve_config(config_file, extras, base);
    if (sub == train && threads > 0)
      cfg.set("train.threads", std::to_string(threads));
    const Resolved r = resolve(cfg);

    if (sub == ingest)
      return cmd_ingest(r, data, out);
    if (sub == train)
      return cmd_train(r, data, out_path, split, out, err);
    if (sub == generate) {
      if (lambda >= 0.0)
        gen.lambda = lambda;
      return cmd_generate(gen, out, err);
    }
    if (sub == eval)
      return cmd_eval(r, generated, reference, json_path, csv_path,
                      density_path, out);
    if (sub == audit)
      return cmd_audit(r, tolerance, jitter, corrupt, out);
    return cmd_make_synthetic(r, so, out_path, out);
  } catch (const UsageError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error &e) {
    err << "error: E_IO: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace tflow
