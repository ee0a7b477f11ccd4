//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_GENEVAE_GENEVAE_H_
#define DRP_GENEVAE_GENEVAE_H_

#include <string>
#include <vector>

#include "drp/autodiff/checkpoint.h"
#include "drp/autodiff/graph.h"
#include "drp/autodiff/layers.h"
#include "drp/autodiff/ops.h"
#include "drp/common/rng.h"

namespace drp::genevae {

using ad::Matrix;
using ad::Var;

struct GeneVaeConfig {
  int input_width = 0;
  int hidden_width = 256;
  int latent_width = 256;
  // When set, log-variance gets its own first layer instead of sharing h1.
  bool separate_sigma_branch = false;
};

// Encoder:  h1 = ReLU(BN(x W1)), mu = h1 W2 + b2, logvar = h1' Ws + bs,
//           where h1' is h1 or the output of a second, independent layer 1.
// Decoder:  logits = ReLU(z W3 + b3) W4 + b4, reconstruction = sigmoid(logits).
template <typename T>
class GeneVae {
 public:
  struct Encoded {
    Var mu;
    Var logvar;
  };
  struct Losses {
    Var total;
    Var reconstruction;
    Var kl;
  };

  GeneVae() = default;
  GeneVae(const GeneVaeConfig &config, Rng &rng);

  const GeneVaeConfig &config() const { return config_; }

  Encoded Encode(ad::Graph<T> &g, Var x, bool train);
  Var DecodeLogits(ad::Graph<T> &g, Var z);

  // reconstruction + beta * kl on a batch x (rows in [0, 1]). eps supplies
  // the reparameterization noise; an empty eps decodes the mean instead.
  Losses Loss(ad::Graph<T> &g, const Matrix<T> &x, const Matrix<T> &eps, T beta, bool train);

  // Eval-mode helpers on plain matrices (rows are samples).
  Matrix<T> EncodeMean(const Matrix<T> &x);
  Matrix<T> EncodeLogVar(const Matrix<T> &x);
  Matrix<T> Decode(const Matrix<T> &z);

  std::vector<ad::Parameter<T> *> Parameters();

  void Save(ad::Checkpoint &ckpt, const std::string &prefix) const;
  static GeneVae Load(const ad::Checkpoint &ckpt, const std::string &prefix);

  // Copies weights and batch-norm statistics from a model of another precision.
  template <typename U>
  void CopyFrom(GeneVae<U> &other);

  ad::BatchNormState<T> &bn_state() { return bn1_; }
  ad::BatchNormState<T> &sigma_bn_state() { return bn_sigma_; }

 private:
  template <typename U>
  friend class GeneVae;

  void CheckWidth(int cols, int expected, const char *what) const;

  GeneVaeConfig config_;
  ad::Dense<T> layer1_;
  ad::Parameter<T> gamma1_;
  ad::Parameter<T> beta1_;
  ad::BatchNormState<T> bn1_;
  ad::Dense<T> mu_head_;
  ad::Dense<T> sigma_layer1_;
  ad::Parameter<T> sigma_gamma_;
  ad::Parameter<T> sigma_beta_;
  ad::BatchNormState<T> bn_sigma_;
  ad::Dense<T> logvar_head_;
  ad::Dense<T> decoder1_;
  ad::Dense<T> decoder2_;
};

// Per-gene min-max scaling to [0, 1] fitted on training rows. Values outside
// the fitted range are clamped; a constant gene maps to 0.
struct MinMaxScaler {
  std::vector<double> min;
  std::vector<double> max;

  // rows are samples, columns genes
  static MinMaxScaler Fit(const Eigen::MatrixXd &rows);
  Eigen::MatrixXd Transform(const Eigen::MatrixXd &rows) const;
};

extern template class GeneVae<float>;
extern template class GeneVae<double>;

}  // namespace drp::genevae

#endif  // DRP_GENEVAE_GENEVAE_H_
