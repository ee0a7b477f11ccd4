//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "drp/common/error.h"
#include "drp/data/synth.h"
#include "drp/experiment/experiment.h"

namespace drp::experiment {
namespace {

ExperimentInputs SmallInputs() {
  data::SynthConfig s;
  s.n_drugs = 8;
  s.seed = 5;
  const data::SyntheticData syn = data::Synthesize(s);
  return {syn.expression, syn.cgc, syn.responses, syn.drugs, "PAN"};
}

ExperimentConfig FastConfig() {
  ExperimentConfig c;
  c.seed = 2;
  c.genevae.epochs = 2;
  c.genevae.hidden_width = 16;
  c.genevae.latent_width = 16;
  c.predictor.max_epochs = 2;
  c.predictor.patience = 0;
  c.predictor.drug.iterations = 2;
  c.predictor.drug.width = 16;
  return c;
}

TEST(Variant, NamesRoundTrip) {
  for (Variant v : AllVariants()) EXPECT_EQ(ParseVariant(VariantName(v)), v);
  EXPECT_EQ(VariantName(Variant::kCgcVaeMlp), "cgc+vae+mlp");
  EXPECT_TRUE(IsSvr(Variant::kCgcSvr));
  EXPECT_FALSE(IsSvr(Variant::kRawVaeMlp));
  EXPECT_THROW(ParseVariant("vae"), DomainError);
}

TEST(Experiment, CsvFormat) {
  const std::vector<VariantResult> rows = {{Variant::kCgcSvr, {"test", 0.5, 1.25, 10}},
                                           {Variant::kCgcVaeMlp, {"test", 0.75, 0.5, 10}}};
  EXPECT_EQ(FormatExperimentCsv(rows, "BREAST"),
            "model,cancer_type,r2_test,rmse_test\n"
            "cgc+svr,BREAST,0.5,1.25\n"
            "cgc+vae+mlp,BREAST,0.75,0.5\n");
}

TEST(Experiment, MissingCheckpointIsDataError) {
  ExperimentConfig c = FastConfig();
  c.cgc_genevae_checkpoint = "/nonexistent/genevae.ckpt";
  Artifacts artifacts;
  EXPECT_THROW(RunExperiment({Variant::kCgcVaeMlp}, SmallInputs(), c, artifacts), DataError);
}

TEST(Experiment, AllVariantsDeterministicInRequestedOrder) {
  const ExperimentInputs inputs = SmallInputs();
  const std::vector<Variant> order = {Variant::kCgcSvr, Variant::kCgcVaeMlp, Variant::kCgcMlp,
                                      Variant::kRawVaeMlp, Variant::kCgcVaeSvr};
  Artifacts first;
  const auto a = RunExperiment(order, inputs, FastConfig(), first);
  ASSERT_EQ(a.size(), order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    EXPECT_EQ(a[i].variant, order[i]);
    EXPECT_TRUE(std::isfinite(a[i].test.rmse));
    EXPECT_GT(a[i].test.count, 0u);
  }
  EXPECT_TRUE(first.cgc_vae.has_value());
  EXPECT_TRUE(first.raw_vae.has_value());
  EXPECT_EQ(first.svr_runs.size(), 2u);
  // The raw geneVAE sees more genes than the CGC one.
  EXPECT_GT(first.raw_vae->genes.size(), first.cgc_vae->genes.size());

  Artifacts second;
  const auto b = RunExperiment(order, inputs, FastConfig(), second);
  EXPECT_EQ(FormatExperimentCsv(a, "PAN"), FormatExperimentCsv(b, "PAN"));
}

TEST(Experiment, CgcExpressionMatchesFilter) {
  const ExperimentInputs inputs = SmallInputs();
  const auto m = CgcExpression(inputs, {});
  for (const auto &g : m.genes) EXPECT_TRUE(inputs.cgc.contains(g));
  EXPECT_LT(m.genes.size(), inputs.cgc.size());
}

}  // namespace
}  // namespace drp::experiment
