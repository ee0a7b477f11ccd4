//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/genevae/genevae.h"

#include <algorithm>

#include "drp/common/error.h"

namespace drp::genevae {
namespace {

template <typename T>
ad::Parameter<T> Filled(const std::string &name, int width, T value) {
  return ad::Parameter<T>(name, Matrix<T>::Constant(1, width, value));
}

}  // namespace

template <typename T>
GeneVae<T>::GeneVae(const GeneVaeConfig &config, Rng &rng) : config_(config) {
  if (config.input_width < 1 || config.hidden_width < 1 || config.latent_width < 1) {
    throw DimensionError("geneVAE widths must be positive");
  }
  const int in = config.input_width;
  const int h = config.hidden_width;
  const int z = config.latent_width;
  // Layer 1 has no bias: batch normalization cancels it.
  layer1_ = ad::Dense<T>("genevae.enc1", in, h, rng, false);
  gamma1_ = Filled<T>("genevae.bn1.gamma", h, T(1));
  beta1_ = Filled<T>("genevae.bn1.beta", h, T(0));
  bn1_ = ad::BatchNormState<T>(h);
  mu_head_ = ad::Dense<T>("genevae.mu", h, z, rng);
  if (config.separate_sigma_branch) {
    sigma_layer1_ = ad::Dense<T>("genevae.sigma_enc1", in, h, rng, false);
    sigma_gamma_ = Filled<T>("genevae.sigma_bn1.gamma", h, T(1));
    sigma_beta_ = Filled<T>("genevae.sigma_bn1.beta", h, T(0));
    bn_sigma_ = ad::BatchNormState<T>(h);
  }
  logvar_head_ = ad::Dense<T>("genevae.logvar", h, z, rng);
  decoder1_ = ad::Dense<T>("genevae.dec1", z, h, rng);
  decoder2_ = ad::Dense<T>("genevae.dec2", h, in, rng);
}

template <typename T>
void GeneVae<T>::CheckWidth(int cols, int expected, const char *what) const {
  if (cols != expected) {
    throw DimensionError(std::string("geneVAE ") + what + " width " + std::to_string(cols) +
                         ", expected " + std::to_string(expected));
  }
}

template <typename T>
typename GeneVae<T>::Encoded GeneVae<T>::Encode(ad::Graph<T> &g, Var x, bool train) {
  CheckWidth(static_cast<int>(g.value(x).cols()), config_.input_width, "input");
  Var h1 = ad::Relu(g, ad::BatchNorm(g, layer1_.Forward(g, x), g.Leaf(gamma1_), g.Leaf(beta1_),
                                     bn1_, train));
  Var hs = h1;
  if (config_.separate_sigma_branch) {
    hs = ad::Relu(g, ad::BatchNorm(g, sigma_layer1_.Forward(g, x), g.Leaf(sigma_gamma_),
                                   g.Leaf(sigma_beta_), bn_sigma_, train));
  }
  return {mu_head_.Forward(g, h1), logvar_head_.Forward(g, hs)};
}

template <typename T>
Var GeneVae<T>::DecodeLogits(ad::Graph<T> &g, Var z) {
  CheckWidth(static_cast<int>(g.value(z).cols()), config_.latent_width, "latent");
  return decoder2_.Forward(g, ad::Relu(g, decoder1_.Forward(g, z)));
}

template <typename T>
typename GeneVae<T>::Losses GeneVae<T>::Loss(ad::Graph<T> &g, const Matrix<T> &x,
                                             const Matrix<T> &eps, T beta, bool train) {
  if (x.size() > 0 && (x.minCoeff() < T(0) || x.maxCoeff() > T(1))) {
    throw DomainError("geneVAE input must be normalized to [0, 1]");
  }
  Var input = g.Constant(x);
  Encoded enc = Encode(g, input, train);
  Var z = eps.size() == 0 ? enc.mu : ad::Reparameterize(g, enc.mu, enc.logvar, eps);
  Var recon = ad::BceWithLogits(g, DecodeLogits(g, z), x);
  Var kl = ad::KlStdNormal(g, enc.mu, enc.logvar);
  Var total = ad::Add(g, recon, ad::Affine(g, kl, beta, T(0)));
  return {total, recon, kl};
}

template <typename T>
Matrix<T> GeneVae<T>::EncodeMean(const Matrix<T> &x) {
  ad::Graph<T> g;
  return g.value(Encode(g, g.Constant(x), false).mu);
}

template <typename T>
Matrix<T> GeneVae<T>::EncodeLogVar(const Matrix<T> &x) {
  ad::Graph<T> g;
  return g.value(Encode(g, g.Constant(x), false).logvar);
}

template <typename T>
Matrix<T> GeneVae<T>::Decode(const Matrix<T> &z) {
  ad::Graph<T> g;
  return g.value(ad::Sigmoid(g, DecodeLogits(g, g.Constant(z))));
}

template <typename T>
std::vector<ad::Parameter<T> *> GeneVae<T>::Parameters() {
  std::vector<ad::Parameter<T> *> out;
  layer1_.Collect(out);
  out.push_back(&gamma1_);
  out.push_back(&beta1_);
  mu_head_.Collect(out);
  if (config_.separate_sigma_branch) {
    sigma_layer1_.Collect(out);
    out.push_back(&sigma_gamma_);
    out.push_back(&sigma_beta_);
  }
  logvar_head_.Collect(out);
  decoder1_.Collect(out);
  decoder2_.Collect(out);
  return out;
}

template <typename T>
void GeneVae<T>::Save(ad::Checkpoint &ckpt, const std::string &prefix) const {
  ckpt.PutInts(prefix + "config", {config_.input_width, config_.hidden_width,
                                   config_.latent_width, config_.separate_sigma_branch ? 1 : 0});
  auto *self = const_cast<GeneVae<T> *>(this);
  for (auto *p : self->Parameters()) ckpt.PutMatrix(prefix + p->name, p->value);
  ckpt.PutMatrix(prefix + "genevae.bn1.running_mean", bn1_.running_mean);
  ckpt.PutMatrix(prefix + "genevae.bn1.running_var", bn1_.running_var);
  if (config_.separate_sigma_branch) {
    ckpt.PutMatrix(prefix + "genevae.sigma_bn1.running_mean", bn_sigma_.running_mean);
    ckpt.PutMatrix(prefix + "genevae.sigma_bn1.running_var", bn_sigma_.running_var);
  }
}

template <typename T>
GeneVae<T> GeneVae<T>::Load(const ad::Checkpoint &ckpt, const std::string &prefix) {
  const auto c = ckpt.GetInts(prefix + "config");
  if (c.size() != 4) throw DataError("geneVAE checkpoint: malformed config entry");
  GeneVaeConfig config;
  config.input_width = static_cast<int>(c[0]);
  config.hidden_width = static_cast<int>(c[1]);
  config.latent_width = static_cast<int>(c[2]);
  config.separate_sigma_branch = c[3] != 0;
  Rng rng(0);
  GeneVae<T> model(config, rng);
  for (auto *p : model.Parameters()) {
    Matrix<T> v = ckpt.GetMatrix<T>(prefix + p->name);
    if (v.rows() != p->value.rows() || v.cols() != p->value.cols()) {
      throw DimensionError("geneVAE checkpoint shape mismatch for " + p->name);
    }
    p->value = std::move(v);
    p->ZeroGrad();
  }
  model.bn1_.running_mean = ckpt.GetMatrix<T>(prefix + "genevae.bn1.running_mean");
  model.bn1_.running_var = ckpt.GetMatrix<T>(prefix + "genevae.bn1.running_var");
  if (config.separate_sigma_branch) {
    model.bn_sigma_.running_mean = ckpt.GetMatrix<T>(prefix + "genevae.sigma_bn1.running_mean");
    model.bn_sigma_.running_var = ckpt.GetMatrix<T>(prefix + "genevae.sigma_bn1.running_var");
  }
  return model;
}

template <typename T>
template <typename U>
void GeneVae<T>::CopyFrom(GeneVae<U> &other) {
  config_ = other.config_;
  Rng rng(0);
  *this = GeneVae<T>(config_, rng);
  ad::CopyParameterValues(Parameters(), other.Parameters());
  bn1_.running_mean = other.bn1_.running_mean.template cast<T>();
  bn1_.running_var = other.bn1_.running_var.template cast<T>();
  bn_sigma_.running_mean = other.bn_sigma_.running_mean.template cast<T>();
  bn_sigma_.running_var = other.bn_sigma_.running_var.template cast<T>();
}

MinMaxScaler MinMaxScaler::Fit(const Eigen::MatrixXd &rows) {
  if (rows.rows() == 0) throw DataError("min-max scaler needs at least one row");
  MinMaxScaler s;
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    s.min.push_back(rows.col(j).minCoeff());
    s.max.push_back(rows.col(j).maxCoeff());
  }
  return s;
}

Eigen::MatrixXd MinMaxScaler::Transform(const Eigen::MatrixXd &rows) const {
  if (static_cast<std::size_t>(rows.cols()) != min.size()) {
    throw DimensionError("min-max scaler width mismatch");
  }
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    const double range = max[j] - min[j];
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      out(i, j) = range > 0.0 ? std::clamp((rows(i, j) - min[j]) / range, 0.0, 1.0) : 0.0;
    }
  }
  return out;
}

template class GeneVae<float>;
template class GeneVae<double>;
template void GeneVae<float>::CopyFrom<double>(GeneVae<double> &);
template void GeneVae<double>::CopyFrom<float>(GeneVae<float> &);

}  // namespace drp::genevae
