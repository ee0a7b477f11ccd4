//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

// Command-line entry point. Data goes to files under --out, logs to stderr.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 training divergence.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "drp/analysis/metrics.h"
#include "drp/analysis/tissue.h"
#include "drp/analysis/tsne.h"
#include "drp/common/csv.h"
#include "drp/common/error.h"
#include "drp/common/hash.h"
#include "drp/data/config.h"
#include "drp/data/expression.h"
#include "drp/data/response.h"
#include "drp/data/synth.h"
#include "drp/experiment/experiment.h"
#include "drp/genevae/train.h"
#include "drp/predictor/train.h"

#ifndef DRP_VERSION
#define DRP_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace drp::cli {
namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDiverged = 3;

class UsageError : public Error {
 public:
  using Error::Error;
};

// key=value log lines on stderr.
class Log {
 public:
  explicit Log(std::string command) : command_(std::move(command)) {}

  void Info(const std::string &msg, const std::map<std::string, std::string> &fields = {}) const {
    Emit("info", msg, fields);
  }
  void Warn(const std::string &msg, const std::map<std::string, std::string> &fields = {}) const {
    Emit("warn", msg, fields);
  }

 private:
  void Emit(const char *level, const std::string &msg,
            const std::map<std::string, std::string> &fields) const {
    std::string line = std::string("level=") + level + " cmd=" + command_ + " msg=" + Quote(msg);
    for (const auto &[k, v] : fields) line += " " + k + "=" + Quote(v);
    std::cerr << line << "\n";
  }
  static std::string Quote(const std::string &s) {
    if (s.find_first_of(" \"=") == std::string::npos && !s.empty()) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  }

  std::string command_;
};

// Options shared by every subcommand.
struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

// Resolved configuration plus the bookkeeping for the manifest.
class Run {
 public:
  Run(std::string command, const Common &common) : command_(std::move(command)), log_(command_) {
    std::string path = common.config_path;
    if (path.empty()) {
      if (const char *env = std::getenv("DRP_CONFIG")) path = env;
    }
    if (!path.empty()) {
      config_ = data::Config::Load(path);
      AddInput(path);
    }
    for (const auto &kv : common.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw UsageError("--set expects key=value, got '" + kv + "'");
      }
      config_.Set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (common.seed) config_.Set("seed", std::to_string(*common.seed));
    seed_ = static_cast<std::uint64_t>(config_.GetInt("seed", 1));
    out_ = common.out;
    fs::create_directories(out_);
  }

  const data::Config &config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  const Log &log() const { return log_; }
  const fs::path &out() const { return out_; }

  const std::string &AddInput(const std::string &path) {
    if (!fs::exists(path)) throw DataError("input file not found: " + path);
    inputs_[path] = Sha256File(path);
    return path;
  }

  fs::path Output(const std::string &name) {
    outputs_.insert(name);
    return out_ / name;
  }

  void Write(const std::string &name, std::string_view content) {
    WriteTextFile(Output(name), content);
  }

  void WriteManifest() const {
    nlohmann::json j;
    j["command"] = command_;
    j["seed"] = seed_;
    j["config"] = config_.Canonical();
    j["config_hash"] = Sha256Hex(config_.Canonical());
    j["inputs"] = nlohmann::json::object();
    for (const auto &[path, hash] : inputs_) j["inputs"][path] = hash;
    j["outputs"] = nlohmann::json::object();
    for (const auto &name : outputs_) {
      const fs::path p = out_ / name;
      if (fs::exists(p)) j["outputs"][name] = Sha256File(p);
    }
    j["versions"] = {
        {"drp", DRP_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION)},
        {"compiler", __VERSION__},
    };
    WriteTextFile(out_ / "manifest.json", j.dump(2) + "\n");
  }

 private:
  std::string command_;
  Log log_;
  data::Config config_;
  std::uint64_t seed_ = 1;
  fs::path out_;
  std::map<std::string, std::string> inputs_;
  std::set<std::string> outputs_;
};

int Int(const data::Config &c, const std::string &key, int fallback) {
  return static_cast<int>(c.GetInt(key, fallback));
}

std::array<int, 3> Ratio(const data::Config &c, const std::string &key, std::array<int, 3> fallback) {
  const auto v = c.GetIntArray(key, {fallback[0], fallback[1], fallback[2]});
  if (v.size() != 3) throw UsageError(key + " needs three integers");
  return {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])};
}

data::FilterThresholds Thresholds(const data::Config &c) {
  data::FilterThresholds t;
  t.min_mean = c.GetDouble("filter.min_mean", t.min_mean);
  t.min_std = c.GetDouble("filter.min_std", t.min_std);
  return t;
}

genevae::GeneVaeTrainConfig GeneVaeConfig(const Run &run) {
  const auto &c = run.config();
  genevae::GeneVaeTrainConfig g;
  g.seed = run.seed();
  g.epochs = Int(c, "genevae.epochs", g.epochs);
  g.batch_size = Int(c, "genevae.batch_size", g.batch_size);
  g.learning_rate = c.GetDouble("genevae.learning_rate", g.learning_rate);
  g.anneal_epochs = Int(c, "genevae.anneal_epochs", g.anneal_epochs);
  g.valid_fraction = c.GetDouble("genevae.valid_fraction", g.valid_fraction);
  g.hidden_width = Int(c, "genevae.hidden", g.hidden_width);
  g.latent_width = Int(c, "genevae.latent", g.latent_width);
  g.separate_sigma_branch = c.GetBool("genevae.separate_sigma_branch", g.separate_sigma_branch);
  return g;
}

predictor::PredictorTrainConfig PredictorConfig(const Run &run) {
  const auto &c = run.config();
  predictor::PredictorTrainConfig p;
  p.seed = run.seed();
  p.max_epochs = Int(c, "predictor.max_epochs", p.max_epochs);
  p.patience = Int(c, "predictor.patience", p.patience);
  p.batch_size = Int(c, "predictor.batch_size", p.batch_size);
  p.learning_rate = c.GetDouble("predictor.learning_rate", p.learning_rate);
  p.drug_learning_rate = c.GetDouble("predictor.drug_learning_rate", p.drug_learning_rate);
  p.kl_weight = c.GetDouble("predictor.kl_weight", p.kl_weight);
  p.sample_drug_latent = c.GetBool("predictor.sample_drug_latent", p.sample_drug_latent);
  p.train_drug_encoder = c.GetBool("predictor.train_drug_encoder", p.train_drug_encoder);
  p.drug.iterations = Int(c, "drugenc.iterations", p.drug.iterations);
  p.drug.width = Int(c, "drugenc.width", p.drug.width);
  return p;
}

// Shared data flags.
struct DataPaths {
  std::string expression;
  std::string cgc;
  std::string gdsc;
  std::string drugs;
  std::string tissue;
};

data::ExpressionMatrix LoadExpressionFor(Run &run, const DataPaths &paths) {
  data::ExpressionMatrix m = data::LoadExpression(run.AddInput(paths.expression));
  std::string tissue = paths.tissue.empty() ? run.config().GetString("data.tissue", "")
                                            : paths.tissue;
  if (!tissue.empty()) m = data::SelectTissue(m, tissue);
  run.log().Info("expression loaded", {{"genes", std::to_string(m.num_genes())},
                                       {"cell_lines", std::to_string(m.num_lines())},
                                       {"tissue", tissue.empty() ? "all" : tissue}});
  return m;
}

std::string CancerType(const Run &run, const DataPaths &paths) {
  std::string tissue = paths.tissue.empty() ? run.config().GetString("data.tissue", "")
                                            : paths.tissue;
  return tissue.empty() ? "PAN" : tissue;
}

std::string MetricsCsv(const std::vector<analysis::MetricReport> &reports) {
  std::string out = "split,r2,rmse,count\n";
  for (const auto &r : reports) {
    out += r.label + "," + FormatDouble(r.r2) + "," + FormatDouble(r.rmse) + "," +
           std::to_string(r.count) + "\n";
  }
  return out;
}

std::string MatrixCsv(const std::vector<std::string> &ids, const std::string &id_name,
                      const Eigen::MatrixXd &m, const std::string &prefix) {
  std::string out = id_name;
  for (Eigen::Index j = 0; j < m.cols(); ++j) out += "," + prefix + std::to_string(j + 1);
  out += "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += CsvField(ids[i]);
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += "," + FormatDouble(m(i, j));
    out += "\n";
  }
  return out;
}

// --- subcommands -------------------------------------------------------------

void Synth(Run &run) {
  const auto &c = run.config();
  data::SynthConfig s;
  s.seed = run.seed();
  s.n_lines = Int(c, "synth.lines", s.n_lines);
  s.n_genes = Int(c, "synth.genes", s.n_genes);
  s.n_drugs = Int(c, "synth.drugs", s.n_drugs);
  s.noise_sd = c.GetDouble("synth.noise_sd", s.noise_sd);
  s.drop_fraction = c.GetDouble("synth.drop_fraction", s.drop_fraction);
  const data::SyntheticData syn = data::Synthesize(s);
  for (const auto &p : data::WriteSynthetic(run.out(), syn)) run.Output(p.filename().string());
  run.log().Info("synthetic benchmark written",
                 {{"responses", std::to_string(syn.responses.size())}});
}

void Ingest(Run &run, const DataPaths &paths) {
  const data::ExpressionMatrix expr = LoadExpressionFor(run, paths);
  const auto cgc = data::LoadGeneSet(run.AddInput(paths.cgc));
  auto [filtered, report] = data::FilterGenes(expr, &cgc, Thresholds(run.config()));
  run.Write("filter_report.csv", report.ToCsv(expr.genes));
  run.Write("expression_filtered.csv", data::FormatExpressionCsv(filtered));
  run.log().Info("genes filtered", {{"kept", std::to_string(report.kept.size())},
                                    {"not_in_cgc", std::to_string(report.dropped_not_in_cgc.size())},
                                    {"low_mean", std::to_string(report.dropped_low_mean.size())},
                                    {"low_std", std::to_string(report.dropped_low_std.size())}});
  if (!paths.gdsc.empty() || !paths.drugs.empty()) {
    if (paths.gdsc.empty() || paths.drugs.empty()) {
      throw UsageError("--gdsc and --drugs must be given together");
    }
    auto dataset = data::JoinResponse(filtered, data::LoadGdsc(run.AddInput(paths.gdsc)),
                                      data::LoadDrugTable(run.AddInput(paths.drugs)));
    data::AssignSplits(dataset, Ratio(run.config(), "predictor.split", {18, 1, 1}), run.seed(),
                       run.config().GetBool("predictor.split_by_cell_line", false));
    run.Write("dataset.csv", data::FormatDatasetCsv(dataset));
    run.Write("dropped.csv", data::FormatDroppedCsv(dataset.dropped));
    run.log().Info("responses joined", {{"records", std::to_string(dataset.records.size())},
                                        {"dropped", std::to_string(dataset.dropped.size())}});
  }
}

data::ExpressionMatrix MaybeFilter(Run &run, const DataPaths &paths, data::ExpressionMatrix expr) {
  if (paths.cgc.empty()) return expr;
  const auto cgc = data::LoadGeneSet(run.AddInput(paths.cgc));
  return data::FilterGenes(expr, &cgc, Thresholds(run.config())).first;
}

void TrainGeneVae(Run &run, const DataPaths &paths) {
  const data::ExpressionMatrix expr = MaybeFilter(run, paths, LoadExpressionFor(run, paths));
  auto result = genevae::TrainGeneVae(expr, GeneVaeConfig(run));
  for (const auto &e : result.history) {
    run.log().Info("epoch", {{"epoch", std::to_string(e.epoch)},
                             {"train_total", FormatDouble(e.train_total)},
                             {"valid_total", FormatDouble(e.valid_total)}});
  }
  result.bundle.Save(run.Output("genevae.ckpt"));
  run.Write("genevae_history.csv", genevae::FormatHistoryCsv(result.history));
  const Eigen::MatrixXd z = result.bundle.LatentMeans(expr).cast<double>();
  run.Write("latent_means.csv", MatrixCsv(expr.cell_lines, "cell_line", z, "z"));
}

void TrainPredictor(Run &run, const DataPaths &paths, const std::string &genevae_path) {
  const data::ExpressionMatrix expr = MaybeFilter(run, paths, LoadExpressionFor(run, paths));
  const auto drugs = data::LoadDrugTable(run.AddInput(paths.drugs));
  auto dataset = data::JoinResponse(expr, data::LoadGdsc(run.AddInput(paths.gdsc)), drugs);
  data::AssignSplits(dataset, Ratio(run.config(), "predictor.split", {18, 1, 1}), run.seed(),
                     run.config().GetBool("predictor.split_by_cell_line", false));
  predictor::GeneFeaturizer featurizer =
      genevae_path.empty()
          ? predictor::GeneFeaturizer::Direct(expr)
          : predictor::GeneFeaturizer::FromVae(genevae::GeneVaeBundle::Load(run.AddInput(genevae_path)));
  std::vector<std::string> smiles;
  for (const auto &d : drugs) smiles.push_back(d.smiles);
  const auto vocab = chem::ClusterVocabulary::Build(smiles);
  auto result = predictor::TrainPredictor(dataset, expr, std::move(featurizer), vocab,
                                          PredictorConfig(run));
  for (const auto &e : result.history) {
    run.log().Info("epoch", {{"epoch", std::to_string(e.epoch)},
                             {"train_mse", FormatDouble(e.train_mse)},
                             {"valid_rmse", FormatDouble(e.valid_rmse)}});
  }
  result.bundle.Save(run.Output("predictor.ckpt"));
  run.Write("predictor_history.csv", predictor::FormatPredictorHistoryCsv(result.history));
  run.Write("dataset.csv", data::FormatDatasetCsv(dataset));
  std::vector<analysis::MetricReport> reports;
  if (result.valid) reports.push_back(*result.valid);
  if (result.test) reports.push_back(*result.test);
  run.Write("metrics.csv", MetricsCsv(reports));
  if (result.test) {
    run.log().Info("test metrics", {{"r2", FormatDouble(result.test->r2)},
                                    {"rmse", FormatDouble(result.test->rmse)},
                                    {"best_epoch", std::to_string(result.best_epoch)}});
  }
}

void Predict(Run &run, const DataPaths &paths, const std::string &model, const std::string &pairs) {
  auto bundle = predictor::PredictorBundle::Load(run.AddInput(model));
  const data::ExpressionMatrix expr = data::LoadExpression(run.AddInput(paths.expression));
  const auto requests = predictor::LoadPredictionRequests(run.AddInput(pairs));
  const auto rows = predictor::PredictBatch(bundle, expr, requests);
  std::size_t failed = 0;
  for (const auto &r : rows) failed += r.ln_ic50 ? 0 : 1;
  run.Write("predictions.csv", predictor::FormatPredictionsCsv(rows));
  run.log().Info("predictions written", {{"rows", std::to_string(rows.size())},
                                         {"skipped", std::to_string(failed)}});
}

void Experiment(Run &run, const DataPaths &paths, const std::vector<std::string> &variant_names,
                const std::string &cgc_vae, const std::string &raw_vae,
                const std::string &drug_encoder) {
  std::vector<experiment::Variant> variants;
  for (const auto &name : variant_names) {
    if (name == "all") {
      for (auto v : experiment::AllVariants()) variants.push_back(v);
    } else {
      try {
        variants.push_back(experiment::ParseVariant(name));
      } catch (const DomainError &e) {
        throw UsageError(e.what());
      }
    }
  }
  if (variants.empty()) variants = experiment::AllVariants();
  experiment::ExperimentInputs inputs;
  inputs.expression = LoadExpressionFor(run, paths);
  inputs.cgc = data::LoadGeneSet(run.AddInput(paths.cgc));
  inputs.responses = data::LoadGdsc(run.AddInput(paths.gdsc));
  inputs.drugs = data::LoadDrugTable(run.AddInput(paths.drugs));
  inputs.cancer_type = CancerType(run, paths);

  experiment::ExperimentConfig config;
  const auto &c = run.config();
  config.seed = run.seed();
  config.genevae = GeneVaeConfig(run);
  config.predictor = PredictorConfig(run);
  config.thresholds = Thresholds(c);
  config.mlp_ratio = Ratio(c, "predictor.split", config.mlp_ratio);
  config.svr_ratio = Ratio(c, "svr.split", config.svr_ratio);
  config.split_by_cell_line = c.GetBool("predictor.split_by_cell_line", false);
  config.svr.c = c.GetDouble("svr.c", config.svr.c);
  config.svr.epsilon = c.GetDouble("svr.epsilon", config.svr.epsilon);
  config.svr.degree = Int(c, "svr.degree", config.svr.degree);
  config.svr.gamma = c.GetDouble("svr.gamma", config.svr.gamma);
  config.svr.coef0 = c.GetDouble("svr.coef0", config.svr.coef0);
  // Checkpoint paths are recorded as inputs only when they exist; a missing
  // one is reported by the runner with its role.
  auto optional_input = [&](const std::string &path) -> std::optional<fs::path> {
    if (path.empty()) return std::nullopt;
    if (fs::exists(path)) run.AddInput(path);
    return fs::path(path);
  };
  config.cgc_genevae_checkpoint = optional_input(cgc_vae);
  config.raw_genevae_checkpoint = optional_input(raw_vae);
  config.drug_encoder_checkpoint = optional_input(drug_encoder);

  experiment::Artifacts artifacts;
  const auto results = experiment::RunExperiment(variants, inputs, config, artifacts);
  for (const auto &r : results) {
    run.log().Info("variant evaluated", {{"model", experiment::VariantName(r.variant)},
                                         {"r2", FormatDouble(r.test.r2)},
                                         {"rmse", FormatDouble(r.test.rmse)}});
  }
  for (const auto &[variant, model] : artifacts.svr_runs) {
    if (!model.converged) run.log().Warn(model.warning, {{"model", experiment::VariantName(variant)}});
  }
  run.Write("experiment.csv", experiment::FormatExperimentCsv(results, inputs.cancer_type));
}

void Tsne(Run &run, const DataPaths &paths, const std::string &genevae_path) {
  const auto &c = run.config();
  data::ExpressionMatrix expr = MaybeFilter(run, paths, LoadExpressionFor(run, paths));
  expr = analysis::TissueThresholdFilter(expr, Int(c, "tsne.min_count", 30));
  Eigen::MatrixXd points;
  if (genevae_path.empty()) {
    points = expr.values.transpose();
  } else {
    auto bundle = genevae::GeneVaeBundle::Load(run.AddInput(genevae_path));
    points = bundle.LatentMeans(expr).cast<double>();
  }
  analysis::TsneConfig tc;
  tc.seed = run.seed();
  tc.perplexity = c.GetDouble("tsne.perplexity", tc.perplexity);
  tc.iterations = Int(c, "tsne.iterations", tc.iterations);
  tc.learning_rate = c.GetDouble("tsne.learning_rate", tc.learning_rate);
  const auto result = analysis::Tsne(points, tc);
  run.Write("tsne.csv", analysis::FormatEmbeddingCsv(result.embedding, expr.tissues));
  std::string trace = "iteration,kl\n";
  for (std::size_t i = 0; i < result.kl.size(); ++i) {
    trace += std::to_string(i + 1) + "," + FormatDouble(result.kl[i]) + "\n";
  }
  run.Write("tsne_trace.csv", trace);
  run.log().Info("embedding written", {{"points", std::to_string(points.rows())},
                                       {"perplexity", FormatDouble(result.perplexity)},
                                       {"final_kl", FormatDouble(result.kl.back())}});
}

void DrugSim(Run &run, const std::string &model, const std::string &drugs_path) {
  auto bundle = predictor::PredictorBundle::Load(run.AddInput(model));
  const auto drugs = data::LoadDrugTable(run.AddInput(drugs_path));
  std::vector<std::string> ids;
  std::vector<Eigen::RowVectorXd> latents;
  for (const auto &d : drugs) {
    try {
      latents.push_back(bundle.drug.Encode(d.smiles).cast<double>());
      ids.push_back(d.drug_id);
    } catch (const Error &e) {
      run.log().Warn("drug skipped", {{"drug_id", d.drug_id}, {"reason", e.what()}});
    }
  }
  Eigen::MatrixXd z(static_cast<Eigen::Index>(latents.size()), drugenc::kDrugLatentWidth);
  for (std::size_t i = 0; i < latents.size(); ++i) z.row(i) = latents[i];
  run.Write("drug_latents.csv", MatrixCsv(ids, "drug_id", z, "z"));
  std::string out = "drug_a,drug_b,distance\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const Eigen::RowVectorXd a = z.row(i);
      const Eigen::RowVectorXd b = z.row(j);
      const double d = analysis::LatentDistance(std::span<const double>(a.data(), a.size()),
                                                std::span<const double>(b.data(), b.size()));
      out += CsvField(ids[i]) + "," + CsvField(ids[j]) + "," + FormatDouble(d) + "\n";
    }
  }
  run.Write("drug_similarity.csv", out);
}

void AddCommon(CLI::App *sub, Common &common) {
  sub->add_option("--config", common.config_path,
                  "TOML config file (default: $DRP_CONFIG); flags take precedence");
  sub->add_option("--set", common.overrides, "Override a config key, key=value (repeatable)");
  sub->add_option("--seed", common.seed, "Seed for every stochastic component");
  sub->add_option("--out", common.out, "Output directory (created if absent)");
}

void AddData(CLI::App *sub, DataPaths &paths, bool need_cgc, bool need_responses) {
  sub->add_option("--expression", paths.expression, "Expression CSV (genes x cell lines)")
      ->required();
  auto *cgc = sub->add_option("--cgc", paths.cgc, "Cancer gene census list");
  if (need_cgc) cgc->required();
  auto *gdsc = sub->add_option("--gdsc", paths.gdsc, "Drug response CSV");
  auto *drugs = sub->add_option("--drugs", paths.drugs, "Drug table CSV (drug_id,smiles)");
  if (need_responses) {
    gdsc->required();
    drugs->required();
  }
  sub->add_option("--tissue", paths.tissue, "Restrict to one tissue token, e.g. BREAST");
}

int Main(int argc, char **argv) {
  CLI::App app{"Drug response prediction from expression profiles and SMILES"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DRP_VERSION);
  Common common;
  DataPaths paths;
  std::string genevae_path;
  std::string model_path;
  std::string pairs_path;
  std::string cgc_vae;
  std::string raw_vae;
  std::string drug_encoder;
  std::vector<std::string> variants;

  auto *synth = app.add_subcommand("synth", "Generate the synthetic benchmark");
  AddCommon(synth, common);
  auto *ingest = app.add_subcommand("ingest", "Validate and filter input data");
  AddCommon(ingest, common);
  AddData(ingest, paths, true, false);
  auto *train_vae = app.add_subcommand("train-genevae", "Train the gene-expression VAE");
  AddCommon(train_vae, common);
  AddData(train_vae, paths, false, false);
  auto *train_pred = app.add_subcommand("train-predictor", "Train drug encoder and predictor");
  AddCommon(train_pred, common);
  AddData(train_pred, paths, false, true);
  train_pred->add_option("--genevae", genevae_path,
                         "geneVAE checkpoint; without it expression is used directly");
  auto *predict = app.add_subcommand("predict", "Score (cell line, SMILES) pairs");
  AddCommon(predict, common);
  predict->add_option("--model", model_path, "Predictor checkpoint")->required();
  predict->add_option("--expression", paths.expression, "Expression CSV")->required();
  predict->add_option("--pairs", pairs_path, "CSV with cell_line,drug_id,smiles")->required();
  auto *exp = app.add_subcommand("experiment", "Run model variants and report test metrics");
  AddCommon(exp, common);
  AddData(exp, paths, true, true);
  exp->add_option("--variant", variants,
                  "cgc+svr, cgc+vae+svr, cgc+mlp, raw+vae+mlp, cgc+vae+mlp or all (repeatable)");
  exp->add_option("--cgc-genevae", cgc_vae, "Pretrained geneVAE on CGC-filtered expression");
  exp->add_option("--raw-genevae", raw_vae, "Pretrained geneVAE on unfiltered expression");
  exp->add_option("--drug-encoder", drug_encoder,
                  "Predictor checkpoint supplying drug latents to SVR variants");
  auto *tsne = app.add_subcommand("tsne", "Embed cell lines in 2-D");
  AddCommon(tsne, common);
  AddData(tsne, paths, false, false);
  tsne->add_option("--genevae", genevae_path, "Embed geneVAE latent means instead of expression");
  auto *sim = app.add_subcommand("drug-sim", "Pairwise drug latent distances");
  AddCommon(sim, common);
  sim->add_option("--model", model_path, "Predictor checkpoint")->required();
  sim->add_option("--drugs", paths.drugs, "Drug table CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  CLI::App *chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  Log log(name);
  try {
    Run run(name, common);
    if (chosen == synth) {
      Synth(run);
    } else if (chosen == ingest) {
      Ingest(run, paths);
    } else if (chosen == train_vae) {
      TrainGeneVae(run, paths);
    } else if (chosen == train_pred) {
      TrainPredictor(run, paths, genevae_path);
    } else if (chosen == predict) {
      Predict(run, paths, model_path, pairs_path);
    } else if (chosen == exp) {
      Experiment(run, paths, variants, cgc_vae, raw_vae, drug_encoder);
    } else if (chosen == tsne) {
      Tsne(run, paths, genevae_path);
    } else if (chosen == sim) {
      DrugSim(run, model_path, paths.drugs);
    }
    run.WriteManifest();
    return 0;
  } catch (const UsageError &e) {
    std::cerr << "level=error cmd=" << name << " msg=\"" << e.what() << "\"\n";
    return kExitUsage;
  } catch (const TrainingDiverged &e) {
    std::cerr << "level=error cmd=" << name << " msg=\"" << e.what() << "\"\n";
    return kExitDiverged;
  } catch (const std::exception &e) {
    std::cerr << "level=error cmd=" << name << " msg=\"" << e.what() << "\"\n";
    return kExitData;
  }
}

}  // namespace
}  // namespace drp::cli

int main(int argc, char **argv) { return drp::cli::Main(argc, argv); }
