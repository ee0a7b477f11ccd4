//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_AUTODIFF_TENSOR_H_
#define DRP_AUTODIFF_TENSOR_H_

#include <Eigen/Dense>

#include <string>
#include <utility>

namespace drp::ad {

// Row-major dense buffer. Tensors in this engine have rank 1 or 2; a vector
// is stored as a 1 x n matrix.
template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A trainable array that outlives individual computation graphs. Gradients
// from every graph that binds it accumulate into grad until ZeroGrad().
template <typename T>
struct Parameter {
  Parameter() = default;
  Parameter(std::string n, Matrix<T> v)
      : name(std::move(n)), value(std::move(v)),
        grad(Matrix<T>::Zero(value.rows(), value.cols())) {}

  void ZeroGrad() { grad.setZero(value.rows(), value.cols()); }

  std::string name;
  Matrix<T> value;
  Matrix<T> grad;
};

template <typename T>
bool AllFinite(const Matrix<T> &m) {
  return m.allFinite();
}

}  // namespace drp::ad

#endif  // DRP_AUTODIFF_TENSOR_H_
