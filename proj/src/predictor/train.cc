//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/predictor/train.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "drp/autodiff/adam.h"
#include "drp/autodiff/ops.h"
#include "drp/common/csv.h"
#include "drp/common/error.h"
#include "drp/common/rng.h"

namespace drp::predictor {
namespace {

using drugenc::PreparedMolecule;

std::vector<std::string> SplitLines(const std::string &text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::string JoinLines(const std::vector<std::string> &items) {
  std::string out;
  for (const auto &s : items) out += s + "\n";
  return out;
}

std::unordered_map<std::string, int> LineIndex(const data::ExpressionMatrix &expr) {
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < expr.cell_lines.size(); ++i) {
    index.emplace(expr.cell_lines[i], static_cast<int>(i));
  }
  return index;
}

Matrix<float> GatherFloatRows(const Matrix<float> &m, const std::vector<int> &rows) {
  Matrix<float> out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
  return out;
}

// Records of a dataset resolved to gene-feature rows and molecule slots.
struct Resolved {
  std::vector<int> gene_row;
  std::vector<int> molecule;
  std::vector<PreparedMolecule> molecules;
};

Resolved Resolve(const data::ResponseDataset &dataset, const data::ExpressionMatrix &expr,
                 const chem::ClusterVocabulary &vocab) {
  Resolved r;
  const auto lines = LineIndex(expr);
  std::map<std::string, int> by_smiles;
  for (const auto &rec : dataset.records) {
    auto it = lines.find(rec.cell_line);
    if (it == lines.end()) {
      throw DataError("cell line " + rec.cell_line + " has no expression profile");
    }
    r.gene_row.push_back(it->second);
    auto [slot, inserted] = by_smiles.emplace(rec.smiles, static_cast<int>(r.molecules.size()));
    if (inserted) {
      try {
        r.molecules.push_back(drugenc::PrepareMolecule(rec.smiles, vocab));
      } catch (const Error &e) {
        throw DataError("drug " + rec.drug_id + " cannot be encoded: " + e.what());
      }
    }
    r.molecule.push_back(slot->second);
  }
  return r;
}

std::vector<double> PredictIndices(PredictorBundle &bundle, const Matrix<float> &features,
                                   const Resolved &r, const std::vector<int> &records) {
  std::vector<const PreparedMolecule *> mols;
  for (const auto &m : r.molecules) mols.push_back(&m);
  const Matrix<float> means = bundle.drug.Means(mols);
  std::vector<int> gene_rows;
  std::vector<int> drug_rows;
  for (int i : records) {
    gene_rows.push_back(r.gene_row[i]);
    drug_rows.push_back(r.molecule[i]);
  }
  const Matrix<float> raw = bundle.predictor.Predict(GatherFloatRows(features, gene_rows),
                                                     GatherFloatRows(means, drug_rows));
  std::vector<double> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    out[i] = bundle.target_mean + bundle.target_scale * static_cast<double>(raw(i, 0));
  }
  return out;
}

std::vector<double> Targets(const data::ResponseDataset &dataset, const std::vector<int> &records) {
  std::vector<double> out;
  for (int i : records) out.push_back(dataset.records[i].ln_ic50);
  return out;
}

}  // namespace

GeneFeaturizer GeneFeaturizer::FromVae(genevae::GeneVaeBundle bundle) {
  GeneFeaturizer f;
  f.mode = Mode::kVaeLatent;
  f.vae = std::move(bundle);
  return f;
}

GeneFeaturizer GeneFeaturizer::Direct(const data::ExpressionMatrix &m) {
  GeneFeaturizer f;
  f.mode = Mode::kDirect;
  f.genes = m.genes;
  f.scaler = genevae::MinMaxScaler::Fit(m.values.transpose());
  return f;
}

int GeneFeaturizer::width() const {
  if (mode == Mode::kVaeLatent) return vae->model.config().latent_width;
  return static_cast<int>(genes.size());
}

Matrix<float> GeneFeaturizer::Features(const data::ExpressionMatrix &m) {
  if (mode == Mode::kVaeLatent) return vae->LatentMeans(m);
  return scaler.Transform(genevae::GatherGenes(m, genes)).cast<float>();
}

void GeneFeaturizer::Save(ad::Checkpoint &ckpt, const std::string &prefix) const {
  if (mode == Mode::kVaeLatent) {
    ckpt.PutText(prefix + "features.mode", "vae");
    vae->Save(ckpt, prefix + "features.");
  } else {
    ckpt.PutText(prefix + "features.mode", "direct");
    ckpt.PutText(prefix + "features.genes", JoinLines(genes));
    ckpt.PutVector(prefix + "features.scaler.min", scaler.min);
    ckpt.PutVector(prefix + "features.scaler.max", scaler.max);
  }
}

GeneFeaturizer GeneFeaturizer::Load(const ad::Checkpoint &ckpt, const std::string &prefix) {
  const std::string mode = ckpt.GetText(prefix + "features.mode");
  if (mode == "vae") {
    return FromVae(genevae::GeneVaeBundle::Load(ckpt, prefix + "features."));
  }
  if (mode != "direct") throw DataError("unknown gene feature mode '" + mode + "'");
  GeneFeaturizer f;
  f.genes = SplitLines(ckpt.GetText(prefix + "features.genes"));
  f.scaler.min = ckpt.GetVector(prefix + "features.scaler.min");
  f.scaler.max = ckpt.GetVector(prefix + "features.scaler.max");
  if (f.scaler.min.size() != f.genes.size() || f.scaler.max.size() != f.genes.size()) {
    throw DataError("gene feature checkpoint: scaler does not match the gene list");
  }
  return f;
}

std::vector<double> PredictorBundle::Predict(const Matrix<float> &gene_rows,
                                             std::span<const PreparedMolecule *const> molecules) {
  if (static_cast<std::size_t>(gene_rows.rows()) != molecules.size()) {
    throw DimensionError("one molecule per gene row expected");
  }
  if (molecules.empty()) return {};
  const Matrix<float> raw = predictor.Predict(gene_rows, drug.Means(molecules));
  std::vector<double> out(molecules.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = target_mean + target_scale * static_cast<double>(raw(i, 0));
  }
  return out;
}

void PredictorBundle::Save(const std::filesystem::path &path) const {
  ad::Checkpoint ckpt;
  genes.Save(ckpt, "");
  drug.Save(ckpt, "");
  predictor.Save(ckpt, "");
  ckpt.PutVector("target.standardization", {target_mean, target_scale});
  ckpt.Save(path);
}

PredictorBundle PredictorBundle::Load(const std::filesystem::path &path) {
  const ad::Checkpoint ckpt = ad::Checkpoint::Load(path);
  PredictorBundle b;
  b.genes = GeneFeaturizer::Load(ckpt, "");
  b.drug = drugenc::DrugEncoder<float>::Load(ckpt, "");
  b.predictor = Predictor<float>::Load(ckpt, "");
  const auto t = ckpt.GetVector("target.standardization");
  if (t.size() != 2) throw DataError(path.string() + ": malformed target standardization");
  b.target_mean = t[0];
  b.target_scale = t[1];
  if (b.predictor.config().gene_width != b.genes.width()) {
    throw DataError(path.string() + ": predictor gene width does not match its features");
  }
  return b;
}

PredictorTrainResult TrainPredictor(const data::ResponseDataset &dataset,
                                    const data::ExpressionMatrix &expr, GeneFeaturizer featurizer,
                                    const chem::ClusterVocabulary &vocab,
                                    const PredictorTrainConfig &config) {
  const std::vector<int> train = dataset.Indices(data::Split::kTrain);
  const std::vector<int> valid = dataset.Indices(data::Split::kValid);
  const std::vector<int> test = dataset.Indices(data::Split::kTest);
  if (train.size() < 2) throw DataError("predictor training needs at least two training records");
  if (valid.empty()) throw DataError("predictor training needs a validation split");

  const Resolved resolved = Resolve(dataset, expr, vocab);
  const Matrix<float> features = featurizer.Features(expr);

  Rng rng(config.seed);
  Rng drug_rng = rng.Split();
  Rng head_rng = rng.Split();
  Rng order_rng = rng.Split();
  Rng sample_rng = rng.Split();

  PredictorTrainResult result;
  PredictorBundle &best = result.bundle;
  PredictorBundle model;
  model.genes = std::move(featurizer);
  model.drug = drugenc::DrugEncoder<float>(vocab, drug_rng, config.drug);
  PredictorConfig pc = config.predictor;
  pc.gene_width = model.genes.width();
  pc.drug_width = drugenc::kDrugLatentWidth;
  model.predictor = Predictor<float>(pc, head_rng);

  const std::vector<double> train_targets = Targets(dataset, train);
  double mean = 0.0;
  for (double t : train_targets) mean += t;
  mean /= static_cast<double>(train_targets.size());
  double var = 0.0;
  for (double t : train_targets) var += (t - mean) * (t - mean);
  var /= static_cast<double>(train_targets.size());
  model.target_mean = mean;
  model.target_scale = var > 0.0 ? std::sqrt(var) : 1.0;
  best = model;

  auto evaluate = [&](PredictorBundle &b, const std::vector<int> &records, const char *label) {
    return analysis::R2Rmse(PredictIndices(b, features, resolved, records),
                            Targets(dataset, records), label);
  };
  auto safe_evaluate = [&](PredictorBundle &b, const std::vector<int> &records, const char *label) {
    try {
      return evaluate(b, records, label);
    } catch (const analysis::R2Undefined &e) {
      return e.report();
    }
  };

  if (config.max_epochs > 0) {
    std::vector<ad::Parameter<float> *> drug_params;
    if (config.train_drug_encoder) drug_params = model.drug.Parameters();
    const double drug_lr =
        config.drug_learning_rate > 0.0 ? config.drug_learning_rate : config.learning_rate;
    ad::Adam<float> drug_adam(drug_params, {.learning_rate = drug_lr});
    ad::Adam<float> adam(model.predictor.Parameters(), {.learning_rate = config.learning_rate});
    const float inv_scale = static_cast<float>(1.0 / model.target_scale);
    double best_rmse = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
      PredictorEpoch e;
      e.epoch = epoch;
      std::vector<int> order = train;
      order_rng.Shuffle(order.begin(), order.end());
      const auto batches = genevae::MakeBatches(order, config.batch_size);
      try {
        for (const auto &batch : batches) {
          std::vector<const PreparedMolecule *> mols;
          std::map<int, int> slot;
          std::vector<int> drug_rows;
          std::vector<int> gene_rows;
          Matrix<float> target(static_cast<Eigen::Index>(batch.size()), 1);
          for (std::size_t i = 0; i < batch.size(); ++i) {
            const int rec = batch[i];
            const int mol = resolved.molecule[rec];
            auto [it, inserted] = slot.emplace(mol, static_cast<int>(mols.size()));
            if (inserted) mols.push_back(&resolved.molecules[mol]);
            drug_rows.push_back(it->second);
            gene_rows.push_back(resolved.gene_row[rec]);
            target(i, 0) =
                static_cast<float>(dataset.records[rec].ln_ic50 - model.target_mean) * inv_scale;
          }
          ad::Graph<float> g;
          auto drug_out =
              model.drug.Forward(g, mols, config.sample_drug_latent ? &sample_rng : nullptr);
          const Var z_drug = ad::GatherRows(g, drug_out.z, drug_rows);
          const Var z_gene = g.Constant(GatherFloatRows(features, gene_rows));
          const Var pred = model.predictor.Forward(g, z_gene, z_drug).prediction;
          const Var mse = ad::Mse(g, pred, target);
          const Var loss = ad::Add(
              g, mse, ad::Affine(g, drug_out.kl, static_cast<float>(config.kl_weight), 0.0f));
          adam.ZeroGrad();
          drug_adam.ZeroGrad();
          g.Backward(loss);
          adam.Step();
          drug_adam.Step();
          const double n = static_cast<double>(batch.size());
          e.running_loss += n * g.scalar(loss);
          e.train_kl += n * g.scalar(drug_out.kl);
        }
      } catch (const TrainingDiverged &err) {
        throw TrainingDiverged(std::string("predictor training diverged: ") + err.what(), epoch);
      }
      e.running_loss /= static_cast<double>(train.size());
      e.train_kl /= static_cast<double>(train.size());
      const double train_rmse = safe_evaluate(model, train, "train").rmse;
      e.train_mse = train_rmse * train_rmse;
      const analysis::MetricReport v = safe_evaluate(model, valid, "valid");
      if (!std::isfinite(v.rmse)) throw TrainingDiverged("validation RMSE is not finite", epoch);
      e.valid_rmse = v.rmse;
      e.valid_r2 = v.r2;
      result.history.push_back(e);
      if (v.rmse < best_rmse) {
        best_rmse = v.rmse;
        result.best_epoch = epoch;
        best = model;
        since_best = 0;
      } else if (config.patience > 0 && ++since_best >= config.patience) {
        break;
      }
    }
  }

  result.valid = safe_evaluate(best, valid, "valid");
  if (!test.empty()) result.test = safe_evaluate(best, test, "test");
  return result;
}

std::vector<double> PredictRecords(PredictorBundle &bundle, const data::ResponseDataset &dataset,
                                   const data::ExpressionMatrix &expr, data::Split split) {
  const std::vector<int> records = dataset.Indices(split);
  if (records.empty()) return {};
  const Resolved resolved = Resolve(dataset, expr, bundle.drug.vocabulary());
  const Matrix<float> features = bundle.genes.Features(expr);
  return PredictIndices(bundle, features, resolved, records);
}

std::vector<PredictionRow> PredictBatch(PredictorBundle &bundle, const data::ExpressionMatrix &expr,
                                        const std::vector<PredictionRequest> &requests) {
  std::vector<PredictionRow> rows;
  rows.reserve(requests.size());
  if (requests.empty()) return rows;
  const auto lines = LineIndex(expr);
  const Matrix<float> features = bundle.genes.Features(expr);
  std::map<std::string, std::optional<PreparedMolecule>> prepared;
  std::map<std::string, std::string> failures;
  std::vector<int> ok;
  std::vector<int> gene_rows;
  std::vector<const PreparedMolecule *> mols;
  for (const auto &req : requests) {
    PredictionRow row;
    row.request = req;
    if (!prepared.count(req.smiles)) {
      try {
        prepared[req.smiles] = drugenc::PrepareMolecule(req.smiles, bundle.drug.vocabulary());
      } catch (const VocabularyError &e) {
        prepared[req.smiles] = std::nullopt;
        failures[req.smiles] = "unknown cluster " + e.label();
      } catch (const Error &e) {
        prepared[req.smiles] = std::nullopt;
        failures[req.smiles] = std::string("smiles unparseable: ") + e.what();
      }
    }
    auto line = lines.find(req.cell_line);
    if (line == lines.end()) {
      row.status = "unknown cell line";
    } else if (!prepared[req.smiles]) {
      row.status = failures[req.smiles];
    } else {
      row.status = "ok";
      ok.push_back(static_cast<int>(rows.size()));
      gene_rows.push_back(line->second);
      mols.push_back(&*prepared[req.smiles]);
    }
    rows.push_back(std::move(row));
  }
  const std::vector<double> preds = bundle.Predict(GatherFloatRows(features, gene_rows), mols);
  for (std::size_t i = 0; i < ok.size(); ++i) rows[ok[i]].ln_ic50 = preds[i];
  return rows;
}

std::vector<PredictionRequest> LoadPredictionRequests(const std::filesystem::path &path) {
  const CsvTable table = ReadCsv(path);
  auto column = [&](const std::string &name) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
      throw DataError(path.string() + ": missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - table.header.begin());
  };
  const std::size_t line = column("cell_line");
  const std::size_t smiles = column("smiles");
  const auto drug_it = std::find(table.header.begin(), table.header.end(), "drug_id");
  std::vector<PredictionRequest> out;
  for (const auto &r : table.rows) {
    PredictionRequest req;
    req.cell_line = r[line];
    req.smiles = r[smiles];
    if (drug_it != table.header.end()) req.drug_id = r[drug_it - table.header.begin()];
    out.push_back(std::move(req));
  }
  return out;
}

std::string FormatPredictionsCsv(const std::vector<PredictionRow> &rows) {
  std::string out = "cell_line,drug_id,smiles,predicted_ln_ic50,status\n";
  for (const auto &r : rows) {
    out += CsvField(r.request.cell_line) + "," + CsvField(r.request.drug_id) + "," +
           CsvField(r.request.smiles) + "," + (r.ln_ic50 ? FormatDouble(*r.ln_ic50) : "") + "," +
           CsvField(r.status) + "\n";
  }
  return out;
}

std::string FormatPredictorHistoryCsv(const std::vector<PredictorEpoch> &history) {
  std::string out = "epoch,running_loss,train_mse,train_kl,valid_rmse,valid_r2\n";
  for (const auto &e : history) {
    out += std::to_string(e.epoch) + "," + FormatDouble(e.running_loss) + "," +
           FormatDouble(e.train_mse) + "," +
           FormatDouble(e.train_kl) + "," + FormatDouble(e.valid_rmse) + "," +
           FormatDouble(e.valid_r2) + "\n";
  }
  return out;
}

}  // namespace drp::predictor
