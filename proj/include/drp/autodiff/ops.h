//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_AUTODIFF_OPS_H_
#define DRP_AUTODIFF_OPS_H_

#include <span>
#include <vector>

#include "drp/autodiff/graph.h"
#include "drp/autodiff/tensor.h"

// Differentiable operations. Binary elementwise ops accept operands of equal
// shape or a 1x1 scalar on either side; no other broadcasting exists. Row
// broadcasting of a bias is confined to Linear().
namespace drp::ad {

template <typename T>
Var MatMul(Graph<T> &g, Var a, Var b);

// x * W + b, with b a 1 x out row added to every row. bias may be invalid.
template <typename T>
Var Linear(Graph<T> &g, Var x, Var weight, Var bias);

template <typename T>
Var Add(Graph<T> &g, Var a, Var b);
template <typename T>
Var Sub(Graph<T> &g, Var a, Var b);
template <typename T>
Var Mul(Graph<T> &g, Var a, Var b);

// scale * x + shift with constant scale and shift.
template <typename T>
Var Affine(Graph<T> &g, Var x, T scale, T shift);

template <typename T>
Var Relu(Graph<T> &g, Var x);
template <typename T>
Var Sigmoid(Graph<T> &g, Var x);
template <typename T>
Var Tanh(Graph<T> &g, Var x);
template <typename T>
Var Exp(Graph<T> &g, Var x);
template <typename T>
Var Square(Graph<T> &g, Var x);

// Parametric ReLU with a learnable 1x1 slope.
template <typename T>
Var PRelu(Graph<T> &g, Var x, Var slope);

template <typename T>
Var Sum(Graph<T> &g, Var x);
template <typename T>
Var Mean(Graph<T> &g, Var x);

template <typename T>
Var ConcatCols(Graph<T> &g, std::span<const Var> parts);

// out[i] = x[index[i]]
template <typename T>
Var GatherRows(Graph<T> &g, Var x, std::vector<int> index);

// out[index[i]] += x[i]; rows are accumulated in ascending i.
template <typename T>
Var ScatterAddRows(Graph<T> &g, Var x, std::vector<int> index, int rows);

// out[i] = scale[i] * x[i]
template <typename T>
Var RowScale(Graph<T> &g, Var x, std::vector<T> scale);

template <typename T>
struct BatchNormState {
  explicit BatchNormState(int features = 0)
      : running_mean(Matrix<T>::Zero(1, features)),
        running_var(Matrix<T>::Ones(1, features)) {}

  Matrix<T> running_mean;
  Matrix<T> running_var;
  T momentum = T(0.1);
  T eps = T(1e-5);
};

// Training mode normalizes with batch statistics (biased variance) and
// updates the running estimates (unbiased variance) once per call. Eval mode
// normalizes with the running estimates.
template <typename T>
Var BatchNorm(Graph<T> &g, Var x, Var gamma, Var beta,
              BatchNormState<T> &state, bool train);

// Binary cross-entropy between sigmoid(logits) and target, summed over
// columns and averaged over rows. Evaluated in the logit domain.
template <typename T>
Var BceWithLogits(Graph<T> &g, Var logits, Matrix<T> target);

// KL(N(mu, exp(logvar)) || N(0, I)) summed over columns, averaged over rows.
template <typename T>
Var KlStdNormal(Graph<T> &g, Var mu, Var logvar);

// Mean squared error over all elements.
template <typename T>
Var Mse(Graph<T> &g, Var pred, Matrix<T> target);

// mu + exp(logvar / 2) * eps for a constant noise draw.
template <typename T>
Var Reparameterize(Graph<T> &g, Var mu, Var logvar, Matrix<T> eps);

}  // namespace drp::ad

#endif  // DRP_AUTODIFF_OPS_H_
