//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_PREDICTOR_TRAIN_H_
#define DRP_PREDICTOR_TRAIN_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "drp/analysis/metrics.h"
#include "drp/chem/vocabulary.h"
#include "drp/data/expression.h"
#include "drp/data/response.h"
#include "drp/drugenc/drug_encoder.h"
#include "drp/genevae/train.h"
#include "drp/predictor/predictor.h"

namespace drp::predictor {

// Turns an expression matrix into per-cell-line gene features: either the
// frozen geneVAE posterior means or the min-max scaled expression itself.
struct GeneFeaturizer {
  enum class Mode { kVaeLatent, kDirect };

  Mode mode = Mode::kDirect;
  std::optional<genevae::GeneVaeBundle> vae;
  std::vector<std::string> genes;  // kDirect
  genevae::MinMaxScaler scaler;    // kDirect

  static GeneFeaturizer FromVae(genevae::GeneVaeBundle bundle);
  // Scaler fitted on every cell line of m.
  static GeneFeaturizer Direct(const data::ExpressionMatrix &m);

  int width() const;
  // One row per cell line of m. Throws DataError when a gene is missing.
  Matrix<float> Features(const data::ExpressionMatrix &m);

  void Save(ad::Checkpoint &ckpt, const std::string &prefix) const;
  static GeneFeaturizer Load(const ad::Checkpoint &ckpt, const std::string &prefix);
};

// Everything needed to score (cell line, SMILES) pairs.
struct PredictorBundle {
  GeneFeaturizer genes;
  drugenc::DrugEncoder<float> drug;
  Predictor<float> predictor;
  // The network is trained on standardized ln IC50.
  double target_mean = 0.0;
  double target_scale = 1.0;

  // ln IC50 for each (gene row, molecule) pair, using drug latent means.
  std::vector<double> Predict(const Matrix<float> &gene_rows,
                              std::span<const drugenc::PreparedMolecule *const> molecules);

  void Save(const std::filesystem::path &path) const;
  static PredictorBundle Load(const std::filesystem::path &path);
};

struct PredictorTrainConfig {
  int max_epochs = 200;
  // Stop after this many epochs without a lower validation RMSE; 0 disables.
  int patience = 25;
  int batch_size = 8;
  double learning_rate = 3e-4;
  // Drug encoder step size; <= 0 uses learning_rate.
  double drug_learning_rate = 0.0;
  double kl_weight = 1e-3;
  // Train on reparameterized drug latents instead of their means.
  bool sample_drug_latent = false;
  // When false the drug encoder keeps its initial weights.
  bool train_drug_encoder = true;
  std::uint64_t seed = 1;
  drugenc::DrugEncoderConfig drug;
  // gene_width is taken from the featurizer.
  PredictorConfig predictor;
};

struct PredictorEpoch {
  int epoch = 0;
  // Mean of the minibatch objectives seen during the epoch.
  double running_loss = 0.0;
  // Train split re-scored after the epoch, ln IC50 units.
  double train_mse = 0.0;
  double train_kl = 0.0;
  double valid_rmse = 0.0;
  double valid_r2 = 0.0;
};

struct PredictorTrainResult {
  PredictorBundle bundle;  // weights of the best validation epoch
  std::vector<PredictorEpoch> history;
  int best_epoch = 0;
  std::optional<analysis::MetricReport> valid;
  std::optional<analysis::MetricReport> test;
};

// Trains drug encoder and predictor end to end on the train split of
// dataset (splits must be assigned), with early stopping on the validation
// split. Gene features stay frozen. Throws DataError for an empty train or
// validation split, a cell line missing from expr or an unparseable drug,
// and TrainingDiverged with the epoch.
PredictorTrainResult TrainPredictor(const data::ResponseDataset &dataset,
                                    const data::ExpressionMatrix &expr, GeneFeaturizer featurizer,
                                    const chem::ClusterVocabulary &vocab,
                                    const PredictorTrainConfig &config);

// Predictions of bundle for the records of one split, in record order.
std::vector<double> PredictRecords(PredictorBundle &bundle, const data::ResponseDataset &dataset,
                                   const data::ExpressionMatrix &expr, data::Split split);

struct PredictionRequest {
  std::string cell_line;
  std::string drug_id;
  std::string smiles;
};

struct PredictionRow {
  PredictionRequest request;
  std::optional<double> ln_ic50;
  std::string status;  // "ok" or the reason the row was skipped
};

// Deterministic predictions in input order; unknown cell lines and
// unusable SMILES are reported per row.
std::vector<PredictionRow> PredictBatch(PredictorBundle &bundle, const data::ExpressionMatrix &expr,
                                        const std::vector<PredictionRequest> &requests);

// cell_line,drug_id,smiles CSV with header.
std::vector<PredictionRequest> LoadPredictionRequests(const std::filesystem::path &path);
// cell_line,drug_id,smiles,predicted_ln_ic50,status
std::string FormatPredictionsCsv(const std::vector<PredictionRow> &rows);
std::string FormatPredictorHistoryCsv(const std::vector<PredictorEpoch> &history);

}  // namespace drp::predictor

#endif  // DRP_PREDICTOR_TRAIN_H_
