//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_EXPERIMENT_EXPERIMENT_H_
#define DRP_EXPERIMENT_EXPERIMENT_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "drp/analysis/metrics.h"
#include "drp/analysis/svr.h"
#include "drp/data/expression.h"
#include "drp/data/response.h"
#include "drp/genevae/train.h"
#include "drp/predictor/train.h"

namespace drp::experiment {

enum class Variant { kCgcSvr, kCgcVaeSvr, kCgcMlp, kRawVaeMlp, kCgcVaeMlp };

std::string VariantName(Variant v);
// Throws DomainError listing the accepted names.
Variant ParseVariant(std::string_view name);
std::vector<Variant> AllVariants();
bool IsSvr(Variant v);

struct ExperimentInputs {
  data::ExpressionMatrix expression;  // unfiltered
  std::set<std::string> cgc;
  std::vector<data::GdscRow> responses;
  std::vector<data::DrugEntry> drugs;
  std::string cancer_type = "PAN";
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  genevae::GeneVaeTrainConfig genevae;
  predictor::PredictorTrainConfig predictor;
  // gamma <= 0 selects 1 / feature width.
  analysis::SvrConfig svr{.gamma = 0.0};
  std::array<int, 3> mlp_ratio{18, 1, 1};
  std::array<int, 3> svr_ratio{9, 0, 1};
  bool split_by_cell_line = false;
  data::FilterThresholds thresholds;
  // Optional pretrained artifacts. A path that is set must exist.
  std::optional<std::filesystem::path> cgc_genevae_checkpoint;
  std::optional<std::filesystem::path> raw_genevae_checkpoint;
  // Predictor bundle whose drug encoder supplies the SVR drug features.
  std::optional<std::filesystem::path> drug_encoder_checkpoint;
};

// Models trained while running variants, reused by later ones.
struct Artifacts {
  std::optional<genevae::GeneVaeBundle> cgc_vae;
  std::optional<genevae::GeneVaeBundle> raw_vae;
  std::optional<predictor::PredictorBundle> drug_source;
  std::map<Variant, predictor::PredictorTrainResult> mlp_runs;
  std::map<Variant, analysis::SvrModel> svr_runs;
};

struct VariantResult {
  Variant variant;
  analysis::MetricReport test;
};

// Wires and evaluates one variant on its test split:
//   cgc+svr      CGC-filtered expression and drug latents into the SVR
//   cgc+vae+svr  geneVAE latents of CGC-filtered expression and drug latents
//   cgc+mlp      CGC-filtered expression straight into the predictor
//   raw+vae+mlp  geneVAE latents of the unfiltered expression
//   cgc+vae+mlp  geneVAE latents of CGC-filtered expression
// SVR variants take their drug encoder from drug_encoder_checkpoint, or
// from a cgc+vae+mlp run (trained when not yet in artifacts).
// Throws DataError naming a configured checkpoint that does not exist.
VariantResult RunVariant(Variant variant, const ExperimentInputs &inputs,
                         const ExperimentConfig &config, Artifacts &artifacts);

// Runs the variants with MLP variants first so SVR variants reuse the
// trained drug encoder; results are returned in the requested order.
std::vector<VariantResult> RunExperiment(const std::vector<Variant> &variants,
                                         const ExperimentInputs &inputs,
                                         const ExperimentConfig &config, Artifacts &artifacts);

// model,cancer_type,r2_test,rmse_test
std::string FormatExperimentCsv(const std::vector<VariantResult> &results,
                                const std::string &cancer_type);

// Expression restricted to CGC genes passing the mean and spread filters.
data::ExpressionMatrix CgcExpression(const ExperimentInputs &inputs,
                                     const data::FilterThresholds &thresholds);

}  // namespace drp::experiment

#endif  // DRP_EXPERIMENT_EXPERIMENT_H_
