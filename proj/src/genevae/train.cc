//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/genevae/train.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "drp/autodiff/adam.h"
#include "drp/common/csv.h"
#include "drp/common/error.h"
#include "drp/common/rng.h"
#include "drp/data/response.h"

namespace drp::genevae {
namespace {

Matrix<float> Rows(const Eigen::MatrixXd &x, const std::vector<int> &rows) {
  Matrix<float> out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = x.row(rows[i]).cast<float>();
  return out;
}

Matrix<float> Noise(Rng &rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix<float> eps(rows, cols);
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = static_cast<float>(rng.Normal());
  return eps;
}

}  // namespace

std::vector<std::vector<int>> MakeBatches(const std::vector<int> &order, int batch_size) {
  if (batch_size < 2) throw DomainError("batch size must be at least 2");
  std::vector<std::vector<int>> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    const std::size_t end = std::min(order.size(), i + batch_size);
    batches.emplace_back(order.begin() + i, order.begin() + end);
  }
  if (batches.size() > 1 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back()[0]);
    batches.pop_back();
  }
  return batches;
}

Eigen::MatrixXd GatherGenes(const data::ExpressionMatrix &m, const std::vector<std::string> &genes) {
  std::vector<int> rows;
  rows.reserve(genes.size());
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < m.genes.size(); ++i) index.emplace(m.genes[i], static_cast<int>(i));
  for (const auto &gene : genes) {
    auto it = index.find(gene);
    if (it == index.end()) throw DataError("expression matrix lacks trained gene " + gene);
    rows.push_back(it->second);
  }
  Eigen::MatrixXd x(m.num_lines(), static_cast<Eigen::Index>(genes.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) x.col(j) = m.values.row(rows[j]).transpose();
  return x;
}

Eigen::MatrixXd GeneVaeBundle::Normalize(const data::ExpressionMatrix &m) const {
  return scaler.Transform(GatherGenes(m, genes));
}

Matrix<float> GeneVaeBundle::LatentMeans(const data::ExpressionMatrix &m) {
  return model.EncodeMean(Normalize(m).cast<float>());
}

void GeneVaeBundle::Save(ad::Checkpoint &ckpt, const std::string &prefix) const {
  model.Save(ckpt, prefix);
  ckpt.PutVector(prefix + "scaler.min", scaler.min);
  ckpt.PutVector(prefix + "scaler.max", scaler.max);
  std::string names;
  for (const auto &g : genes) names += g + "\n";
  ckpt.PutText(prefix + "genes", names);
}

GeneVaeBundle GeneVaeBundle::Load(const ad::Checkpoint &ckpt, const std::string &prefix) {
  GeneVaeBundle b;
  b.model = GeneVae<float>::Load(ckpt, prefix);
  b.scaler.min = ckpt.GetVector(prefix + "scaler.min");
  b.scaler.max = ckpt.GetVector(prefix + "scaler.max");
  const std::string names = ckpt.GetText(prefix + "genes");
  std::size_t start = 0;
  while (start < names.size()) {
    const auto end = names.find('\n', start);
    b.genes.push_back(names.substr(start, end - start));
    start = end + 1;
  }
  if (b.genes.size() != b.scaler.min.size() ||
      static_cast<int>(b.genes.size()) != b.model.config().input_width) {
    throw DataError("geneVAE checkpoint: gene list does not match the model width");
  }
  return b;
}

void GeneVaeBundle::Save(const std::filesystem::path &path) const {
  ad::Checkpoint ckpt;
  Save(ckpt, "");
  ckpt.Save(path);
}

GeneVaeBundle GeneVaeBundle::Load(const std::filesystem::path &path) {
  return Load(ad::Checkpoint::Load(path), "");
}

GeneVaeTrainResult TrainGeneVae(const data::ExpressionMatrix &m, const GeneVaeTrainConfig &config) {
  if (m.num_lines() < 2) throw DataError("geneVAE training needs at least two cell lines");
  Rng rng(config.seed);
  GeneVaeTrainResult result;
  auto [train_lines, valid_lines] = data::SplitIndices(m.num_lines(), config.valid_fraction,
                                                       rng.NextU64());
  result.train_lines = train_lines;
  result.valid_lines = valid_lines;

  const Eigen::MatrixXd raw = m.values.transpose();
  Eigen::MatrixXd train_raw(train_lines.size(), raw.cols());
  for (std::size_t i = 0; i < train_lines.size(); ++i) train_raw.row(i) = raw.row(train_lines[i]);

  GeneVaeBundle &bundle = result.bundle;
  bundle.genes = m.genes;
  bundle.scaler = MinMaxScaler::Fit(train_raw);
  const Eigen::MatrixXd x = bundle.scaler.Transform(raw);

  GeneVaeConfig model_config;
  model_config.input_width = static_cast<int>(m.num_genes());
  model_config.hidden_width = config.hidden_width;
  model_config.latent_width = config.latent_width;
  model_config.separate_sigma_branch = config.separate_sigma_branch;
  Rng init_rng = rng.Split();
  GeneVae<float> model(model_config, init_rng);
  bundle.model = model;
  if (config.epochs <= 0) return result;

  Rng noise_rng = rng.Split();
  Rng order_rng = rng.Split();
  ad::Adam<float> adam(model.Parameters(), {.learning_rate = config.learning_rate});
  const Matrix<float> valid_x = Rows(x, valid_lines);
  double best = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochLoss e;
    e.epoch = epoch;
    e.beta = config.anneal_epochs > 0
                 ? std::min(1.0, static_cast<double>(epoch - 1) / config.anneal_epochs)
                 : 1.0;
    e.min_batch_kl = std::numeric_limits<double>::infinity();
    std::vector<int> order = train_lines;
    order_rng.Shuffle(order.begin(), order.end());
    const auto batches = MakeBatches(order, config.batch_size);
    double weight = 0.0;
    try {
      for (const auto &batch : batches) {
        const Matrix<float> bx = Rows(x, batch);
        ad::Graph<float> g;
        auto losses = model.Loss(g, bx, Noise(noise_rng, bx.rows(), model_config.latent_width),
                                 static_cast<float>(e.beta), true);
        adam.ZeroGrad();
        g.Backward(losses.total);
        adam.Step();
        const double n = static_cast<double>(batch.size());
        e.train_total += n * g.scalar(losses.total);
        e.train_reconstruction += n * g.scalar(losses.reconstruction);
        e.train_kl += n * g.scalar(losses.kl);
        e.min_batch_kl = std::min<double>(e.min_batch_kl, g.scalar(losses.kl));
        weight += n;
      }
    } catch (const TrainingDiverged &err) {
      throw TrainingDiverged(std::string("geneVAE training diverged: ") + err.what(), epoch);
    }
    e.train_total /= weight;
    e.train_reconstruction /= weight;
    e.train_kl /= weight;

    ad::Graph<float> g;
    auto losses = model.Loss(g, valid_x, Matrix<float>(), 1.0f, false);
    e.valid_total = g.scalar(losses.total);
    e.valid_reconstruction = g.scalar(losses.reconstruction);
    e.valid_kl = g.scalar(losses.kl);
    if (!std::isfinite(e.valid_total)) {
      throw TrainingDiverged("geneVAE validation loss is not finite", epoch);
    }
    result.history.push_back(e);
    if (e.valid_total < best) {
      best = e.valid_total;
      result.best_epoch = epoch;
      bundle.model = model;
    }
  }
  return result;
}

std::string FormatHistoryCsv(const std::vector<EpochLoss> &history) {
  std::string out =
      "epoch,beta,train_total,train_reconstruction,train_kl,valid_total,valid_reconstruction,"
      "valid_kl\n";
  for (const auto &e : history) {
    out += std::to_string(e.epoch) + "," + FormatDouble(e.beta) + "," + FormatDouble(e.train_total) +
           "," + FormatDouble(e.train_reconstruction) + "," + FormatDouble(e.train_kl) + "," +
           FormatDouble(e.valid_total) + "," + FormatDouble(e.valid_reconstruction) + "," +
           FormatDouble(e.valid_kl) + "\n";
  }
  return out;
}

}  // namespace drp::genevae
