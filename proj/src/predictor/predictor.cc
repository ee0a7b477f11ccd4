//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/predictor/predictor.h"

#include "drp/autodiff/ops.h"
#include "drp/common/error.h"

namespace drp::predictor {

template <typename T>
PreluMlp<T>::PreluMlp(const std::string &name, int in, const std::vector<int> &widths, double slope,
                      Rng &rng)
    : in_(in), widths_(widths) {
  int prev = in;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const std::string layer = name + "." + std::to_string(i + 1);
    layers_.emplace_back(layer, prev, widths[i], rng);
    Matrix<T> s(1, 1);
    s(0, 0) = static_cast<T>(slope);
    slopes_.emplace_back(layer + ".slope", std::move(s));
    prev = widths[i];
  }
}

template <typename T>
Var PreluMlp<T>::Forward(ad::Graph<T> &g, Var x) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = ad::PRelu(g, layers_[i].Forward(g, x), g.Leaf(slopes_[i]));
  }
  return x;
}

template <typename T>
void PreluMlp<T>::Collect(std::vector<ad::Parameter<T> *> &out) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].Collect(out);
    out.push_back(&slopes_[i]);
  }
}

template <typename T>
Predictor<T>::Predictor(const PredictorConfig &config, Rng &rng) : config_(config) {
  if (config.gene_width < 1 || config.drug_width < 1 || config.gene_layers.empty() ||
      config.drug_layers.empty() || config.combiner_layers.empty()) {
    throw DomainError("predictor widths must be positive and every MLP needs a layer");
  }
  gene_ = PreluMlp<T>("predictor.gene", config.gene_width, config.gene_layers, config.prelu_init,
                      rng);
  drug_ = PreluMlp<T>("predictor.drug", config.drug_width, config.drug_layers, config.prelu_init,
                      rng);
  const int joint = gene_.out_width() + drug_.out_width();
  combiner_ = PreluMlp<T>("predictor.combiner", joint, config.combiner_layers, config.prelu_init,
                          rng);
  output_ = ad::Dense<T>("predictor.output", combiner_.out_width(), 1, rng);
}

template <typename T>
typename Predictor<T>::Activations Predictor<T>::Forward(ad::Graph<T> &g, Var z_gene, Var z_drug) {
  const auto &zg = g.value(z_gene);
  const auto &zd = g.value(z_drug);
  if (zg.cols() != config_.gene_width || zd.cols() != config_.drug_width) {
    throw DimensionError("predictor expects gene width " + std::to_string(config_.gene_width) +
                         " and drug width " + std::to_string(config_.drug_width) + ", got " +
                         std::to_string(zg.cols()) + " and " + std::to_string(zd.cols()));
  }
  if (zg.rows() != zd.rows()) throw DimensionError("gene and drug row counts differ");
  Activations a;
  a.a_gene = gene_.Forward(g, z_gene);
  a.a_drug = drug_.Forward(g, z_drug);
  const Var parts[] = {a.a_gene, a.a_drug};
  a.a_all = ad::ConcatCols<T>(g, parts);
  a.prediction = output_.Forward(g, combiner_.Forward(g, a.a_all));
  return a;
}

template <typename T>
Matrix<T> Predictor<T>::Predict(const Matrix<T> &z_gene, const Matrix<T> &z_drug) {
  ad::Graph<T> g;
  return g.value(Forward(g, g.Constant(z_gene), g.Constant(z_drug)).prediction);
}

template <typename T>
std::vector<ad::Parameter<T> *> Predictor<T>::Parameters() {
  std::vector<ad::Parameter<T> *> out;
  gene_.Collect(out);
  drug_.Collect(out);
  combiner_.Collect(out);
  output_.Collect(out);
  return out;
}

namespace {

std::vector<std::int64_t> Widths(const std::vector<int> &w) {
  return {w.begin(), w.end()};
}

std::vector<int> Widths(const std::vector<std::int64_t> &w) {
  return {w.begin(), w.end()};
}

}  // namespace

template <typename T>
void Predictor<T>::Save(ad::Checkpoint &ckpt, const std::string &prefix) const {
  ckpt.PutInts(prefix + "predictor.input_widths", {config_.gene_width, config_.drug_width});
  ckpt.PutInts(prefix + "predictor.gene_layers", Widths(config_.gene_layers));
  ckpt.PutInts(prefix + "predictor.drug_layers", Widths(config_.drug_layers));
  ckpt.PutInts(prefix + "predictor.combiner_layers", Widths(config_.combiner_layers));
  auto *self = const_cast<Predictor *>(this);
  for (auto *p : self->Parameters()) ckpt.PutMatrix(prefix + p->name, p->value);
}

template <typename T>
Predictor<T> Predictor<T>::Load(const ad::Checkpoint &ckpt, const std::string &prefix) {
  PredictorConfig config;
  const auto inputs = ckpt.GetInts(prefix + "predictor.input_widths");
  if (inputs.size() != 2) throw DataError("predictor checkpoint: malformed input widths");
  config.gene_width = static_cast<int>(inputs[0]);
  config.drug_width = static_cast<int>(inputs[1]);
  config.gene_layers = Widths(ckpt.GetInts(prefix + "predictor.gene_layers"));
  config.drug_layers = Widths(ckpt.GetInts(prefix + "predictor.drug_layers"));
  config.combiner_layers = Widths(ckpt.GetInts(prefix + "predictor.combiner_layers"));
  Rng rng(0);
  Predictor model(config, rng);
  for (auto *p : model.Parameters()) {
    Matrix<T> v = ckpt.GetMatrix<T>(prefix + p->name);
    if (v.rows() != p->value.rows() || v.cols() != p->value.cols()) {
      throw DimensionError("checkpoint shape mismatch for " + p->name);
    }
    p->value = std::move(v);
  }
  return model;
}

template class PreluMlp<float>;
template class PreluMlp<double>;
template class Predictor<float>;
template class Predictor<double>;

}  // namespace drp::predictor
