//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_AUTODIFF_GRADCHECK_H_
#define DRP_AUTODIFF_GRADCHECK_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "drp/autodiff/graph.h"

namespace drp::ad {

struct GradcheckOptions {
  double step = 1e-5;
  // Coordinates probed per parameter; larger tensors are subsampled.
  std::size_t max_coords_per_param = 32;
  std::uint64_t seed = 0;
  // Skip coordinates where the central difference is unstable under halving
  // the step, i.e. a ReLU kink lies within the probe interval.
  bool skip_kinks = false;
};

struct GradcheckResult {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst;  // "<param>[index]" of the largest error
  std::size_t kinks_skipped = 0;
};

// Builds the scalar function with f on fresh 64-bit graphs and compares the
// reverse-mode gradient with central differences. The relative error of a
// coordinate is |a - n| / max(|a|, |n|, 1e-8).
GradcheckResult Gradcheck(const std::function<Var(Graph<double> &)> &f,
                          std::span<Parameter<double> *const> params,
                          const GradcheckOptions &options = {});

}  // namespace drp::ad

#endif  // DRP_AUTODIFF_GRADCHECK_H_
