//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "tflow/chem/metrics.h"
#include "tflow/cli/app.h"
#include "tflow/error.h"
#include "tflow/molio/smiles.h"

namespace tflow {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string> &args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return { code, out.str(), err.str() };
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return { std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>() };
}

class CliTest: public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path()
           / ("tflow_cli_" + std::string(::testing::UnitTest::GetInstance()
                                            ->current_test_info()
                                            ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string &name) const { return (dir_ / name).string(); }

  // Small model settings so training finishes in well under a second.
  static std::vector<std::string> small(std::vector<std::string> args) {
    for (const char *kv: { "--flow.bond_blocks=1", "--flow.atom_blocks=2",
                           "--flow.bond_hidden=8", "--flow.atom_hidden=4",
                           "--encoder.kmer=1", "--encoder.hidden=8",
                           "--train.epochs=3", "--train.batch_size=8" })
      args.emplace_back(kv);
    return args;
  }

  fs::path dir_;
};

TEST_F(CliTest, MakeSyntheticIsDeterministic) {
  ASSERT_EQ(run({ "make-synthetic", "--pairs", "64", "--seed", "7", "--out", path("a.tsv") }).code, 0);
  ASSERT_EQ(run({ "make-synthetic", "--pairs", "64", "--seed", "7", "--out", path("b.tsv") }).code, 0);
  EXPECT_EQ(slurp(path("a.tsv")), slurp(path("b.tsv")));
  ASSERT_EQ(run({ "make-synthetic", "--pairs", "64", "--seed", "8", "--out", path("c.tsv") }).code, 0);
  EXPECT_NE(slurp(path("a.tsv")), slurp(path("c.tsv")));
  const Result ingest = run({ "ingest", "--data", path("a.tsv") });
  ASSERT_EQ(ingest.code, 0) << ingest.err;
  const auto j = nlohmann::json::parse(ingest.out);
  EXPECT_EQ(j.at("records"), 64);
  EXPECT_EQ(j.at("targets"), 16);
  EXPECT_EQ(j.at("distinct_molecules"), 64);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({ "frobnicate" }).code, kExitUsage);
  EXPECT_EQ(run({ "--help" }).code, kExitOk);
  EXPECT_EQ(run({ "ingest", "--data", path("missing.tsv") }).code, kExitData);
  ASSERT_EQ(run({ "make-synthetic", "--pairs", "8", "--out", path("d.tsv") }).code, 0);
  EXPECT_EQ(run({ "ingest", "--data", path("d.tsv"), "--no.such.key", "1" }).code, kExitUsage);
  EXPECT_EQ(run({ "ingest", "--data", path("d.tsv"), "--train.lr" }).code, kExitUsage);
  std::ofstream(path("bad.tsv")) << "T1\tMKV\tC(C\n";
  const Result bad = run({ "ingest", "--data", path("bad.tsv") });
  EXPECT_EQ(bad.code, kExitData);
  EXPECT_NE(bad.err.find("E_SYNTAX"), std::string::npos);
}

TEST_F(CliTest, AuditPassesAndDetectsCorruption) {
  const Result ok = run({ "audit" });
  ASSERT_EQ(ok.code, kExitOk) << ok.out << ok.err;
  EXPECT_TRUE(nlohmann::json::parse(ok.out).at("passed").get<bool>());
  const Result bad = run({ "audit", "--corrupt", "flow.atom" });
  EXPECT_EQ(bad.code, kExitNumerical);
  EXPECT_FALSE(nlohmann::json::parse(bad.out).at("passed").get<bool>());
}

TEST_F(CliTest, PipelineIsDeterministicAndWritesManifests) {
  ASSERT_EQ(run({ "make-synthetic", "--pairs", "24", "--seed", "3", "--out", path("d.tsv") }).code, 0);
  for (const char *out: { "r1", "r2" }) {
    const Result r = run(small({ "train", "--data", path("d.tsv"), "--out", path(out),
                                 "--threads", "1" }));
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(path("r1/model.ckpt")), slurp(path("r2/model.ckpt")));
  EXPECT_EQ(slurp(path("r1/loss.csv")), slurp(path("r2/loss.csv")));
  const std::string loss = slurp(path("r1/loss.csv"));
  EXPECT_EQ(loss.rfind("epoch,align,unif,total\n", 0), 0U);
  EXPECT_EQ(std::count(loss.begin(), loss.end(), '\n'), 4);
  const auto manifest = nlohmann::json::parse(slurp(path("r1/manifest.json")));
  EXPECT_EQ(manifest.at("command"), "train");
  EXPECT_EQ(manifest.at("checkpoint_digest").get<std::string>().size(), 16U);
  EXPECT_NE(manifest.at("config").get<std::string>().find("[flow]"), std::string::npos);

  for (const char *out: { "g1.tsv", "g2.tsv" }) {
    const Result g = run({ "generate", "--checkpoint", path("r1/model.ckpt"), "--data",
                           path("d.tsv"), "--split", "train", "--n", "5", "--seed", "4",
                           "--tsv", "--out", path(out) });
    ASSERT_EQ(g.code, 0) << g.err;
  }
  EXPECT_EQ(slurp(path("g1.tsv")), slurp(path("g2.tsv")));
  EXPECT_TRUE(fs::exists(path("g1.tsv.manifest.json")));

  // Reference: SMILES column of the dataset.
  {
    std::ifstream in(path("d.tsv"));
    std::ofstream ref(path("ref.txt"));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] != '#')
        ref << line.substr(line.rfind('\t') + 1) << '\n';
    }
  }
  const Result e = run({ "eval", "--generated", path("g1.tsv"), "--reference", path("ref.txt"),
                         "--json", path("rep.json"), "--csv", path("rows.csv"), "--density",
                         path("density.csv") });
  ASSERT_EQ(e.code, 0) << e.err;
  const auto rep = nlohmann::json::parse(slurp(path("rep.json")));
  EXPECT_DOUBLE_EQ(rep.at("validity").get<double>(), 100.0);
  const std::string density = slurp(path("density.csv"));
  EXPECT_EQ(std::count(density.begin(), density.end(), '\n'),
            rep.at("valid").get<int>() + 1);
}

TEST_F(CliTest, EvalOfTrainingSetHasZeroNovelty) {
  ASSERT_EQ(run({ "make-synthetic", "--pairs", "12", "--out", path("d.tsv") }).code, 0);
  const Result e = run({ "eval", "--generated", path("d.tsv"), "--reference", path("d.tsv") });
  ASSERT_EQ(e.code, 0) << e.err;
  const auto rep = nlohmann::json::parse(e.out);
  EXPECT_DOUBLE_EQ(rep.at("novelty").get<double>(), 0.0);
  EXPECT_DOUBLE_EQ(rep.at("validity").get<double>(), 100.0);
}

TEST_F(CliTest, UnparseableGeneratedLinesCountAsInvalid) {
  std::ofstream(path("gen.txt")) << "CCO\nC(C\nC.C\n";
  std::ofstream(path("ref.txt")) << "CC\n";
  const Result e = run({ "eval", "--generated", path("gen.txt"), "--reference", path("ref.txt") });
  ASSERT_EQ(e.code, 0) << e.err;
  const auto rep = nlohmann::json::parse(e.out);
  EXPECT_EQ(rep.at("total"), 3);
  EXPECT_EQ(rep.at("valid"), 1);
}

TEST_F(CliTest, DensityDataFormat) {
  MetricsReport empty;
  emit_density_data(empty, path("empty.csv"));
  EXPECT_EQ(slurp(path("empty.csv")), "metric_name,value\n");

  const GraphShape shape;
  const Vocabulary vocab = Vocabulary::default_vocabulary();
  const std::vector<MolGraph> gen = { parse_smiles("CCO", shape, vocab),
                                      parse_smiles("CCN", shape, vocab),
                                      parse_smiles("CC(C)(C)C", shape, vocab) };
  const MetricsReport r = evaluate(gen, { parse_smiles("CCC", shape, vocab) }, vocab);
  emit_density_data(r, path("d.csv"));
  std::istringstream in(slurp(path("d.csv")));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "metric_name,value");
  std::size_t i = 0;
  while (std::getline(in, line)) {
    ASSERT_EQ(line.rfind("nn_tanimoto,", 0), 0U);
    const double v = std::stod(line.substr(line.find(',') + 1));
    EXPECT_NEAR(v, *r.rows[i].nn_tanimoto, 1e-12);
    ++i;
  }
  EXPECT_EQ(i, 3U);
  EXPECT_THROW(emit_density_data(r, "/nonexistent/dir/d.csv"), Error);
}

}  // namespace
}  // namespace tflow
