//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_AUTODIFF_ADAM_H_
#define DRP_AUTODIFF_ADAM_H_

#include <cmath>
#include <utility>
#include <vector>

#include "drp/autodiff/tensor.h"
#include "drp/common/error.h"

namespace drp::ad {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam. Moment buffers are allocated per parameter at
// construction and keep the parameter shapes.
template <typename T>
class Adam {
 public:
  explicit Adam(std::vector<Parameter<T> *> params, AdamConfig config = {})
      : params_(std::move(params)), config_(config) {
    for (auto *p : params_) {
      first_.push_back(Matrix<T>::Zero(p->value.rows(), p->value.cols()));
      second_.push_back(Matrix<T>::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void ZeroGrad() {
    for (auto *p : params_) p->ZeroGrad();
  }

  // Applies one update from the accumulated gradients.
  void Step() {
    for (auto *p : params_) {
      if (!p->grad.allFinite()) {
        throw TrainingDiverged("non-finite gradient for parameter " + p->name);
      }
    }
    ++step_;
    const T b1 = static_cast<T>(config_.beta1);
    const T b2 = static_cast<T>(config_.beta2);
    const T correction1 = T(1) - static_cast<T>(std::pow(config_.beta1, step_));
    const T correction2 = T(1) - static_cast<T>(std::pow(config_.beta2, step_));
    const T lr = static_cast<T>(config_.learning_rate);
    const T eps = static_cast<T>(config_.epsilon);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto &p = *params_[i];
      first_[i] = b1 * first_[i] + (T(1) - b1) * p.grad;
      second_[i] = b2 * second_[i] + (T(1) - b2) * p.grad.cwiseAbs2();
      p.value.array() -= lr * (first_[i].array() / correction1) /
                         ((second_[i].array() / correction2).sqrt() + eps);
    }
  }

  long step_count() const { return step_; }
  const AdamConfig &config() const { return config_; }

 private:
  std::vector<Parameter<T> *> params_;
  AdamConfig config_;
  std::vector<Matrix<T>> first_;
  std::vector<Matrix<T>> second_;
  long step_ = 0;
};

}  // namespace drp::ad

#endif  // DRP_AUTODIFF_ADAM_H_
