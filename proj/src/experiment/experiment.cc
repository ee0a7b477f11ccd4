//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/experiment/experiment.h"

#include <algorithm>
#include <cmath>

#include "drp/chem/vocabulary.h"
#include "drp/common/csv.h"
#include "drp/common/error.h"

namespace drp::experiment {
namespace {

constexpr std::array<std::pair<Variant, const char *>, 5> kNames{{
    {Variant::kCgcSvr, "cgc+svr"},
    {Variant::kCgcVaeSvr, "cgc+vae+svr"},
    {Variant::kCgcMlp, "cgc+mlp"},
    {Variant::kRawVaeMlp, "raw+vae+mlp"},
    {Variant::kCgcVaeMlp, "cgc+vae+mlp"},
}};

void RequireExists(const std::filesystem::path &path, const std::string &what) {
  if (!std::filesystem::exists(path)) {
    throw DataError("missing " + what + " checkpoint: " + path.string());
  }
}

chem::ClusterVocabulary DrugVocabulary(const ExperimentInputs &inputs) {
  std::vector<std::string> smiles;
  for (const auto &d : inputs.drugs) smiles.push_back(d.smiles);
  return chem::ClusterVocabulary::Build(smiles);
}

genevae::GeneVaeBundle &CgcVae(const ExperimentInputs &inputs, const ExperimentConfig &config,
                               Artifacts &artifacts) {
  if (!artifacts.cgc_vae) {
    if (config.cgc_genevae_checkpoint) {
      RequireExists(*config.cgc_genevae_checkpoint, "CGC geneVAE");
      artifacts.cgc_vae = genevae::GeneVaeBundle::Load(*config.cgc_genevae_checkpoint);
    } else {
      artifacts.cgc_vae =
          genevae::TrainGeneVae(CgcExpression(inputs, config.thresholds), config.genevae).bundle;
    }
  }
  return *artifacts.cgc_vae;
}

genevae::GeneVaeBundle &RawVae(const ExperimentInputs &inputs, const ExperimentConfig &config,
                               Artifacts &artifacts) {
  if (!artifacts.raw_vae) {
    if (config.raw_genevae_checkpoint) {
      RequireExists(*config.raw_genevae_checkpoint, "raw geneVAE");
      artifacts.raw_vae = genevae::GeneVaeBundle::Load(*config.raw_genevae_checkpoint);
    } else {
      artifacts.raw_vae = genevae::TrainGeneVae(inputs.expression, config.genevae).bundle;
    }
  }
  return *artifacts.raw_vae;
}

VariantResult RunMlp(Variant variant, const ExperimentInputs &inputs,
                     const ExperimentConfig &config, Artifacts &artifacts) {
  const bool raw = variant == Variant::kRawVaeMlp;
  const data::ExpressionMatrix expr =
      raw ? inputs.expression : CgcExpression(inputs, config.thresholds);
  predictor::GeneFeaturizer featurizer;
  if (variant == Variant::kCgcMlp) {
    featurizer = predictor::GeneFeaturizer::Direct(expr);
  } else {
    featurizer = predictor::GeneFeaturizer::FromVae(raw ? RawVae(inputs, config, artifacts)
                                                        : CgcVae(inputs, config, artifacts));
  }
  data::ResponseDataset dataset = data::JoinResponse(expr, inputs.responses, inputs.drugs);
  data::AssignSplits(dataset, config.mlp_ratio, config.seed, config.split_by_cell_line);
  predictor::PredictorTrainConfig pc = config.predictor;
  auto run = predictor::TrainPredictor(dataset, expr, std::move(featurizer),
                                       DrugVocabulary(inputs), pc);
  if (!run.test) throw DataError("the test split is empty");
  VariantResult result{variant, *run.test};
  result.test.label = VariantName(variant);
  if (variant == Variant::kCgcVaeMlp && !artifacts.drug_source) {
    artifacts.drug_source = run.bundle;
  }
  artifacts.mlp_runs[variant] = std::move(run);
  return result;
}

predictor::PredictorBundle &DrugSource(const ExperimentInputs &inputs,
                                       const ExperimentConfig &config, Artifacts &artifacts) {
  if (!artifacts.drug_source) {
    if (config.drug_encoder_checkpoint) {
      RequireExists(*config.drug_encoder_checkpoint, "drug encoder (predictor)");
      artifacts.drug_source = predictor::PredictorBundle::Load(*config.drug_encoder_checkpoint);
    } else {
      RunMlp(Variant::kCgcVaeMlp, inputs, config, artifacts);
    }
  }
  return *artifacts.drug_source;
}

// Column-standardizes with statistics of the training rows; constant
// columns become 0.
void Standardize(Eigen::MatrixXd &x, const std::vector<int> &train_rows) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double mean = 0.0;
    for (int r : train_rows) mean += x(r, j);
    mean /= static_cast<double>(train_rows.size());
    double var = 0.0;
    for (int r : train_rows) var += (x(r, j) - mean) * (x(r, j) - mean);
    var /= static_cast<double>(train_rows.size());
    const double sd = std::sqrt(var);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = sd > 0.0 ? (x(i, j) - mean) / sd : 0.0;
  }
}

VariantResult RunSvr(Variant variant, const ExperimentInputs &inputs,
                     const ExperimentConfig &config, Artifacts &artifacts) {
  predictor::PredictorBundle &source = DrugSource(inputs, config, artifacts);
  const data::ExpressionMatrix expr = CgcExpression(inputs, config.thresholds);
  ad::Matrix<float> gene;
  if (variant == Variant::kCgcSvr) {
    gene = predictor::GeneFeaturizer::Direct(expr).Features(expr);
  } else {
    gene = CgcVae(inputs, config, artifacts).LatentMeans(expr);
  }
  data::ResponseDataset dataset = data::JoinResponse(expr, inputs.responses, inputs.drugs);
  data::AssignSplits(dataset, config.svr_ratio, config.seed, config.split_by_cell_line);

  std::map<std::string, Eigen::RowVectorXd> drug_latent;
  for (const auto &rec : dataset.records) {
    if (!drug_latent.count(rec.smiles)) {
      drug_latent[rec.smiles] = source.drug.Encode(rec.smiles).cast<double>();
    }
  }
  const Eigen::Index d = gene.cols() + drugenc::kDrugLatentWidth;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(dataset.records.size()), d);
  Eigen::VectorXd y(x.rows());
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const auto &rec = dataset.records[i];
    x.row(i) << gene.row(expr.LineIndex(rec.cell_line)).cast<double>(), drug_latent[rec.smiles];
    y[i] = rec.ln_ic50;
  }
  const std::vector<int> train = dataset.Indices(data::Split::kTrain);
  const std::vector<int> test = dataset.Indices(data::Split::kTest);
  if (train.size() < 2 || test.empty()) throw DataError("SVR split needs train and test records");
  Standardize(x, train);
  auto rows = [&](const std::vector<int> &idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(i) = x.row(idx[i]);
    return out;
  };
  auto targets = [&](const std::vector<int> &idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = y[idx[i]];
    return out;
  };
  analysis::SvrConfig sc = config.svr;
  if (sc.gamma <= 0.0) sc.gamma = 1.0 / static_cast<double>(d);
  analysis::SvrModel model = analysis::SvrFit(rows(train), targets(train), sc);
  const Eigen::VectorXd pred = model.Predict(rows(test));
  const Eigen::VectorXd truth = targets(test);
  VariantResult result{variant,
                       analysis::R2Rmse(std::span<const double>(pred.data(), pred.size()),
                                        std::span<const double>(truth.data(), truth.size()),
                                        VariantName(variant))};
  artifacts.svr_runs[variant] = std::move(model);
  return result;
}

}  // namespace

std::string VariantName(Variant v) {
  for (const auto &[variant, name] : kNames) {
    if (variant == v) return name;
  }
  return "?";
}

Variant ParseVariant(std::string_view name) {
  std::string accepted;
  for (const auto &[variant, n] : kNames) {
    if (name == n) return variant;
    accepted += accepted.empty() ? n : std::string(", ") + n;
  }
  throw DomainError("unknown variant '" + std::string(name) + "' (expected one of " + accepted + ")");
}

std::vector<Variant> AllVariants() {
  std::vector<Variant> out;
  for (const auto &[variant, name] : kNames) out.push_back(variant);
  return out;
}

bool IsSvr(Variant v) { return v == Variant::kCgcSvr || v == Variant::kCgcVaeSvr; }

data::ExpressionMatrix CgcExpression(const ExperimentInputs &inputs,
                                     const data::FilterThresholds &thresholds) {
  return data::FilterGenes(inputs.expression, &inputs.cgc, thresholds).first;
}

VariantResult RunVariant(Variant variant, const ExperimentInputs &inputs,
                         const ExperimentConfig &config, Artifacts &artifacts) {
  return IsSvr(variant) ? RunSvr(variant, inputs, config, artifacts)
                        : RunMlp(variant, inputs, config, artifacts);
}

std::vector<VariantResult> RunExperiment(const std::vector<Variant> &variants,
                                         const ExperimentInputs &inputs,
                                         const ExperimentConfig &config, Artifacts &artifacts) {
  std::vector<std::size_t> order(variants.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return !IsSvr(variants[a]) && IsSvr(variants[b]);
  });
  std::vector<std::optional<VariantResult>> slots(variants.size());
  for (std::size_t i : order) slots[i] = RunVariant(variants[i], inputs, config, artifacts);
  std::vector<VariantResult> out;
  for (auto &s : slots) out.push_back(*s);
  return out;
}

std::string FormatExperimentCsv(const std::vector<VariantResult> &results,
                                const std::string &cancer_type) {
  std::string out = "model,cancer_type,r2_test,rmse_test\n";
  for (const auto &r : results) {
    out += CsvField(VariantName(r.variant)) + "," + CsvField(cancer_type) + "," +
           FormatDouble(r.test.r2) + "," + FormatDouble(r.test.rmse) + "\n";
  }
  return out;
}

}  // namespace drp::experiment
