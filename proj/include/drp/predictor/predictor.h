//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_PREDICTOR_PREDICTOR_H_
#define DRP_PREDICTOR_PREDICTOR_H_

#include <string>
#include <vector>

#include "drp/autodiff/checkpoint.h"
#include "drp/autodiff/graph.h"
#include "drp/autodiff/layers.h"
#include "drp/common/rng.h"

namespace drp::predictor {

using ad::Matrix;
using ad::Var;

struct PredictorConfig {
  int gene_width = 256;
  int drug_width = 56;
  std::vector<int> gene_layers{256, 256, 64};
  std::vector<int> drug_layers{128, 128, 64};
  std::vector<int> combiner_layers{128, 128, 64};
  double prelu_init = 0.25;
};

// Stack of Dense layers, each followed by a PReLU with its own slope.
template <typename T>
class PreluMlp {
 public:
  PreluMlp() = default;
  PreluMlp(const std::string &name, int in, const std::vector<int> &widths, double slope, Rng &rng);

  Var Forward(ad::Graph<T> &g, Var x);
  int in_width() const { return in_; }
  int out_width() const { return widths_.empty() ? in_ : widths_.back(); }
  void Collect(std::vector<ad::Parameter<T> *> &out);

 private:
  int in_ = 0;
  std::vector<int> widths_;
  std::vector<ad::Dense<T>> layers_;
  std::vector<ad::Parameter<T>> slopes_;
};

// a_gene = gene MLP(z_gene), a_drug = drug MLP(z_drug), prediction =
// linear(combiner([a_gene | a_drug])).
template <typename T>
class Predictor {
 public:
  struct Activations {
    Var a_gene;
    Var a_drug;
    Var a_all;
    Var prediction;  // rows x 1
  };

  Predictor() = default;
  Predictor(const PredictorConfig &config, Rng &rng);

  const PredictorConfig &config() const { return config_; }

  // Throws DimensionError when widths or row counts disagree.
  Activations Forward(ad::Graph<T> &g, Var z_gene, Var z_drug);
  Matrix<T> Predict(const Matrix<T> &z_gene, const Matrix<T> &z_drug);

  std::vector<ad::Parameter<T> *> Parameters();

  void Save(ad::Checkpoint &ckpt, const std::string &prefix) const;
  static Predictor Load(const ad::Checkpoint &ckpt, const std::string &prefix);

  template <typename U>
  void CopyFrom(Predictor<U> &other) {
    ad::CopyParameterValues(Parameters(), other.Parameters());
  }

 private:
  PredictorConfig config_;
  PreluMlp<T> gene_;
  PreluMlp<T> drug_;
  PreluMlp<T> combiner_;
  ad::Dense<T> output_;
};

extern template class PreluMlp<float>;
extern template class PreluMlp<double>;
extern template class Predictor<float>;
extern template class Predictor<double>;

}  // namespace drp::predictor

#endif  // DRP_PREDICTOR_PREDICTOR_H_
