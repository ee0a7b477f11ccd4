//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_AUTODIFF_LAYERS_H_
#define DRP_AUTODIFF_LAYERS_H_

#include <cmath>
#include <string>
#include <vector>

#include "drp/autodiff/checkpoint.h"
#include "drp/autodiff/graph.h"
#include "drp/autodiff/ops.h"
#include "drp/autodiff/tensor.h"
#include "drp/common/rng.h"

namespace drp::ad {

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
template <typename T>
Matrix<T> FanInUniform(int fan_in, int rows, int cols, Rng &rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Matrix<T> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = static_cast<T>(rng.Uniform(-bound, bound));
  }
  return m;
}

// Fully connected layer y = x W + b with W stored as in x out.
template <typename T>
struct Dense {
  Dense() = default;
  Dense(const std::string &name, int in, int out, Rng &rng, bool use_bias = true)
      : weight(name + ".weight", FanInUniform<T>(in, in, out, rng)),
        has_bias(use_bias) {
    if (use_bias) bias = Parameter<T>(name + ".bias", FanInUniform<T>(in, 1, out, rng));
  }

  Var Forward(Graph<T> &g, Var x) {
    return Linear(g, x, g.Leaf(weight), has_bias ? g.Leaf(bias) : Var{});
  }

  void Collect(std::vector<Parameter<T> *> &out) {
    out.push_back(&weight);
    if (has_bias) out.push_back(&bias);
  }

  int in_width() const { return static_cast<int>(weight.value.rows()); }
  int out_width() const { return static_cast<int>(weight.value.cols()); }

  Parameter<T> weight;
  Parameter<T> bias;
  bool has_bias = true;
};

template <typename T>
void SaveParameters(Checkpoint &ckpt, const std::vector<Parameter<T> *> &params) {
  for (const auto *p : params) ckpt.PutMatrix(p->name, p->value);
}

// Loads by name; shapes must match the freshly constructed parameters.
template <typename T>
void LoadParameters(const Checkpoint &ckpt, const std::vector<Parameter<T> *> &params) {
  for (auto *p : params) {
    Matrix<T> v = ckpt.GetMatrix<T>(p->name);
    if (v.rows() != p->value.rows() || v.cols() != p->value.cols()) {
      throw DimensionError("checkpoint shape mismatch for " + p->name);
    }
    p->value = std::move(v);
    p->ZeroGrad();
  }
}

// Copies parameter values between two parameter lists of identical layout.
template <typename Dst, typename Src>
void CopyParameterValues(const std::vector<Parameter<Dst> *> &dst,
                         const std::vector<Parameter<Src> *> &src) {
  if (dst.size() != src.size()) throw DimensionError("parameter list sizes differ");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i]->value = src[i]->value.template cast<Dst>();
    dst[i]->ZeroGrad();
  }
}

}  // namespace drp::ad

#endif  // DRP_AUTODIFF_LAYERS_H_
