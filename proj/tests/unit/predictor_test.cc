//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "drp/autodiff/gradcheck.h"
#include "drp/autodiff/ops.h"
#include "drp/data/synth.h"
#include "drp/predictor/predictor.h"
#include "drp/predictor/train.h"

namespace drp::predictor {
namespace {

using drugenc::PreparedMolecule;

Matrix<double> RandomRows(Rng &rng, int rows, int cols) {
  Matrix<double> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.Normal();
  return m;
}

PredictorConfig SmallConfig() {
  PredictorConfig c;
  c.gene_width = 12;
  c.drug_width = 56;
  c.gene_layers = {10, 6};
  c.drug_layers = {9, 6};
  c.combiner_layers = {8, 5};
  return c;
}

TEST(Predictor, DefaultShapes) {
  Rng rng(1);
  Predictor<float> p(PredictorConfig{}, rng);
  ad::Graph<float> g;
  Matrix<float> zg = Matrix<float>::Random(3, 256);
  Matrix<float> zd = Matrix<float>::Random(3, 56);
  auto a = p.Forward(g, g.Constant(zg), g.Constant(zd));
  EXPECT_EQ(g.value(a.a_gene).cols(), 64);
  EXPECT_EQ(g.value(a.a_drug).cols(), 64);
  EXPECT_EQ(g.value(a.a_all).cols(), 128);
  EXPECT_EQ(g.value(a.prediction).rows(), 3);
  EXPECT_EQ(g.value(a.prediction).cols(), 1);
}

TEST(Predictor, ZeroWeightsGiveZero) {
  Rng rng(2);
  Predictor<double> p(SmallConfig(), rng);
  for (auto *param : p.Parameters()) param->value.setZero();
  const Matrix<double> out = p.Predict(RandomRows(rng, 4, 12), RandomRows(rng, 4, 56));
  EXPECT_EQ(out.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Predictor, DrugChangesOutput) {
  Rng rng(3);
  Predictor<double> p(SmallConfig(), rng);
  Matrix<double> gene = RandomRows(rng, 1, 12);
  Matrix<double> gene2(2, 12);
  gene2 << gene, gene;
  const Matrix<double> out = p.Predict(gene2, RandomRows(rng, 2, 56));
  EXPECT_NE(out(0, 0), out(1, 0));
}

TEST(Predictor, WidthMismatch) {
  Rng rng(4);
  Predictor<double> p(SmallConfig(), rng);
  EXPECT_THROW(p.Predict(RandomRows(rng, 2, 11), RandomRows(rng, 2, 56)), DimensionError);
  EXPECT_THROW(p.Predict(RandomRows(rng, 2, 12), RandomRows(rng, 2, 55)), DimensionError);
  EXPECT_THROW(p.Predict(RandomRows(rng, 2, 12), RandomRows(rng, 3, 56)), DimensionError);
}

TEST(Predictor, CheckpointRoundTrip) {
  Rng rng(5);
  Predictor<float> p(SmallConfig(), rng);
  ad::Checkpoint ckpt;
  p.Save(ckpt, "x.");
  auto back = Predictor<float>::Load(ad::Checkpoint::Deserialize(ckpt.Serialize()), "x.");
  const Matrix<float> zg = Matrix<float>::Random(3, 12);
  const Matrix<float> zd = Matrix<float>::Random(3, 56);
  EXPECT_EQ(back.Predict(zg, zd), p.Predict(zg, zd));
}

TEST(Predictor, FullStackGradcheck) {
  const std::vector<std::string> smiles = {"CC(=O)Nc1ccc(O)cc1", "C1CCNCC1", "OCC(N)=O"};
  const auto vocab = chem::ClusterVocabulary::Build(smiles);
  std::vector<PreparedMolecule> mols;
  for (const auto &s : smiles) mols.push_back(drugenc::PrepareMolecule(s, vocab));
  const PreparedMolecule *ptrs[] = {&mols[0], &mols[1], &mols[2]};
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    Rng rng(seed);
    drugenc::DrugEncoder<double> enc(vocab, rng, {.iterations = 2, .width = 6});
    Predictor<double> head(SmallConfig(), rng);
    const Matrix<double> gene = RandomRows(rng, 4, 12);
    const Matrix<double> target = RandomRows(rng, 4, 1);
    const std::vector<int> pick = {0, 1, 2, 0};
    auto params = enc.Parameters();
    for (auto *p : head.Parameters()) params.push_back(p);
    auto result = ad::Gradcheck(
        [&](ad::Graph<double> &g) {
          auto drug = enc.Forward(g, ptrs);
          auto z = ad::GatherRows(g, drug.z, pick);
          auto pred = head.Forward(g, g.Constant(gene), z).prediction;
          auto loss = ad::Add(g, ad::Mse(g, pred, target), ad::Affine(g, drug.kl, 1e-3, 0.0));
          return ad::Affine(g, loss, 1e-2, 0.0);
        },
        params, {.seed = seed});
    EXPECT_LE(result.max_rel_error, 1e-4) << result.worst;
  }
}

// Small benchmark shared by the training tests.
struct Fixture {
  data::SyntheticData syn;
  data::ExpressionMatrix expr;
  data::ResponseDataset dataset;
  chem::ClusterVocabulary vocab;
};

const Fixture &Small() {
  static const Fixture f = [] {
    Fixture x;
    data::SynthConfig sc;
    sc.n_drugs = 16;
    x.syn = data::Synthesize(sc);
    x.expr = data::FilterGenes(x.syn.expression, &x.syn.cgc).first;
    x.dataset = data::JoinResponse(x.expr, x.syn.responses, x.syn.drugs);
    data::AssignSplits(x.dataset, {18, 1, 1}, 4);
    std::vector<std::string> smiles;
    for (const auto &d : x.syn.drugs) smiles.push_back(d.smiles);
    x.vocab = chem::ClusterVocabulary::Build(smiles);
    return x;
  }();
  return f;
}

PredictorTrainConfig FastConfig(int epochs) {
  PredictorTrainConfig c;
  c.max_epochs = epochs;
  c.patience = 0;
  c.seed = 3;
  c.drug.width = 32;
  c.drug.iterations = 3;
  return c;
}

TEST(TrainPredictor, ZeroEpochs) {
  const auto &f = Small();
  auto r = TrainPredictor(f.dataset, f.expr, GeneFeaturizer::Direct(f.expr), f.vocab,
                          FastConfig(0));
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(r.best_epoch, 0);
  ASSERT_TRUE(r.test.has_value());
}

TEST(TrainPredictor, DeterministicWithBestCheckpoint) {
  const auto &f = Small();
  auto a = TrainPredictor(f.dataset, f.expr, GeneFeaturizer::Direct(f.expr), f.vocab,
                          FastConfig(5));
  auto b = TrainPredictor(f.dataset, f.expr, GeneFeaturizer::Direct(f.expr), f.vocab,
                          FastConfig(5));
  ASSERT_EQ(a.history.size(), 5u);
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_mse, b.history[i].train_mse);
    EXPECT_EQ(a.history[i].valid_rmse, b.history[i].valid_rmse);
  }
  double best = a.history[0].valid_rmse;
  for (const auto &e : a.history) best = std::min(best, e.valid_rmse);
  EXPECT_EQ(a.history[a.best_epoch - 1].valid_rmse, best);
  // Re-evaluating the returned bundle reproduces the best validation RMSE.
  EXPECT_NEAR(a.valid->rmse, best, 1e-12);
  const auto preds = PredictRecords(a.bundle, f.dataset, f.expr, data::Split::kValid);
  std::vector<double> truth;
  for (int i : f.dataset.Indices(data::Split::kValid)) truth.push_back(f.dataset.records[i].ln_ic50);
  EXPECT_NEAR(analysis::R2Rmse(preds, truth).rmse, best, 1e-12);
}

TEST(TrainPredictor, TrainMseStrictlyDecreasesOnBenchmark) {
  const data::SyntheticData syn = data::Synthesize({});
  const auto expr = data::FilterGenes(syn.expression, &syn.cgc).first;
  auto dataset = data::JoinResponse(expr, syn.responses, syn.drugs);
  data::AssignSplits(dataset, {18, 1, 1}, 1);
  std::vector<std::string> smiles;
  for (const auto &d : syn.drugs) smiles.push_back(d.smiles);
  PredictorTrainConfig c;
  c.max_epochs = 5;
  auto r = TrainPredictor(dataset, expr, GeneFeaturizer::Direct(expr),
                          chem::ClusterVocabulary::Build(smiles), c);
  ASSERT_EQ(r.history.size(), 5u);
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    EXPECT_LT(r.history[i].train_mse, r.history[i - 1].train_mse) << "epoch " << i + 1;
  }
}

TEST(TrainPredictor, FrozenGeneVaeIsUntouched) {
  const auto &f = Small();
  genevae::GeneVaeTrainConfig vc;
  vc.epochs = 2;
  vc.hidden_width = 16;
  vc.latent_width = 16;
  auto vae = genevae::TrainGeneVae(f.expr, vc).bundle;
  ad::Checkpoint before;
  vae.Save(before, "");
  auto r = TrainPredictor(f.dataset, f.expr, GeneFeaturizer::FromVae(vae), f.vocab, FastConfig(1));
  ad::Checkpoint after;
  ASSERT_TRUE(r.bundle.genes.vae.has_value());
  r.bundle.genes.vae->Save(after, "");
  EXPECT_EQ(before.Serialize(), after.Serialize());
  EXPECT_EQ(r.bundle.predictor.config().gene_width, 16);
}

TEST(TrainPredictor, RejectsMissingSplitsAndLines) {
  const auto &f = Small();
  data::ResponseDataset no_valid = f.dataset;
  for (auto &r : no_valid.records) r.split = data::Split::kTrain;
  EXPECT_THROW(TrainPredictor(no_valid, f.expr, GeneFeaturizer::Direct(f.expr), f.vocab,
                              FastConfig(1)),
               DataError);
  data::ResponseDataset ghost = f.dataset;
  ghost.records[0].cell_line = "NOPE_BREAST";
  EXPECT_THROW(
      TrainPredictor(ghost, f.expr, GeneFeaturizer::Direct(f.expr), f.vocab, FastConfig(1)),
      DataError);
}

TEST(PredictBatch, RowsInOrderWithStatuses) {
  const auto &f = Small();
  auto r = TrainPredictor(f.dataset, f.expr, GeneFeaturizer::Direct(f.expr), f.vocab,
                          FastConfig(1));
  EXPECT_TRUE(PredictBatch(r.bundle, f.expr, {}).empty());
  const std::string line = f.expr.cell_lines[0];
  const std::string smiles = f.syn.drugs[0].smiles;
  const std::vector<PredictionRequest> req = {
      {line, "D0", smiles},
      {"MISSING_LUNG", "D0", smiles},
      {line, "BAD", "C1CC"},
      {line, "D0", smiles},
      {line, "UNSEEN", "C1CCCCCCCCCCCCCCCCCCCC1"},
  };
  const auto rows = PredictBatch(r.bundle, f.expr, req);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].status, "ok");
  EXPECT_EQ(rows[1].status, "unknown cell line");
  EXPECT_NE(rows[2].status.find("smiles unparseable"), std::string::npos);
  EXPECT_EQ(rows[3].status, "ok");
  EXPECT_NE(rows[4].status.find("unknown cluster"), std::string::npos);
  ASSERT_TRUE(rows[0].ln_ic50 && rows[3].ln_ic50);
  EXPECT_EQ(*rows[0].ln_ic50, *rows[3].ln_ic50);
  EXPECT_FALSE(rows[1].ln_ic50.has_value());
  const std::string csv = FormatPredictionsCsv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "cell_line,drug_id,smiles,predicted_ln_ic50,status");
  EXPECT_NE(csv.find("MISSING_LUNG,D0," + smiles + ",,unknown cell line\n"), std::string::npos);

  const auto path = std::filesystem::temp_directory_path() / "drp_predictor_bundle.ckpt";
  r.bundle.Save(path);
  auto loaded = PredictorBundle::Load(path);
  const auto again = PredictBatch(loaded, f.expr, req);
  EXPECT_EQ(*again[0].ln_ic50, *rows[0].ln_ic50);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace drp::predictor
