//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_GENEVAE_TRAIN_H_
#define DRP_GENEVAE_TRAIN_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "drp/data/expression.h"
#include "drp/genevae/genevae.h"

namespace drp::genevae {

struct GeneVaeTrainConfig {
  int epochs = 100;
  int batch_size = 8;
  double learning_rate = 1e-3;
  // beta = min(1, (epoch - 1) / anneal_epochs)
  int anneal_epochs = 30;
  double valid_fraction = 0.1;
  std::uint64_t seed = 1;
  int hidden_width = 256;
  int latent_width = 256;
  bool separate_sigma_branch = false;
};

struct EpochLoss {
  int epoch = 0;
  double beta = 0.0;
  double train_total = 0.0;
  double train_reconstruction = 0.0;
  double train_kl = 0.0;
  // Validation uses beta = 1 and decodes the posterior mean.
  double valid_total = 0.0;
  double valid_reconstruction = 0.0;
  double valid_kl = 0.0;
  // Smallest per-batch KL seen while training this epoch.
  double min_batch_kl = 0.0;
};

// A trained model together with what inference needs: the gene order and
// the normalization fitted on the training lines.
// Raw values of the named genes, one row per cell line of m. Throws
// DataError when a gene is missing.
Eigen::MatrixXd GatherGenes(const data::ExpressionMatrix &m, const std::vector<std::string> &genes);

struct GeneVaeBundle {
  GeneVae<float> model;
  MinMaxScaler scaler;
  std::vector<std::string> genes;

  // Normalized rows (cell lines x genes) in the bundle's gene order. Throws
  // DataError when a trained gene is missing from m.
  Eigen::MatrixXd Normalize(const data::ExpressionMatrix &m) const;
  // Posterior means, one row per cell line of m.
  Matrix<float> LatentMeans(const data::ExpressionMatrix &m);

  void Save(const std::filesystem::path &path) const;
  static GeneVaeBundle Load(const std::filesystem::path &path);
  void Save(ad::Checkpoint &ckpt, const std::string &prefix) const;
  static GeneVaeBundle Load(const ad::Checkpoint &ckpt, const std::string &prefix);
};

struct GeneVaeTrainResult {
  GeneVaeBundle bundle;  // best-validation weights
  std::vector<EpochLoss> history;
  int best_epoch = 0;  // 0 when no epoch ran
  std::vector<int> train_lines;
  std::vector<int> valid_lines;
};

// Mini-batch Adam on the cell lines of m. Throws TrainingDiverged naming the
// epoch when a loss or gradient becomes non-finite and DataError for fewer
// than two lines.
GeneVaeTrainResult TrainGeneVae(const data::ExpressionMatrix &m, const GeneVaeTrainConfig &config);

// Batches of batch_size; a trailing batch of one joins the previous batch so
// batch normalization always sees at least two rows.
std::vector<std::vector<int>> MakeBatches(const std::vector<int> &order, int batch_size);

// Training-curve CSV: epoch,beta,train_total,...,valid_kl.
std::string FormatHistoryCsv(const std::vector<EpochLoss> &history);

}  // namespace drp::genevae

#endif  // DRP_GENEVAE_TRAIN_H_
