//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/autodiff/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "drp/common/error.h"
#include "drp/common/rng.h"

namespace drp::ad {
namespace {

double Evaluate(const std::function<Var(Graph<double> &)> &f) {
  Graph<double> g;
  Var out = f(g);
  if (g.value(out).size() != 1) {
    throw DimensionError("gradcheck: function must return a scalar");
  }
  const double v = g.scalar(out);
  if (!std::isfinite(v)) throw DomainError("gradcheck: non-finite function value");
  return v;
}

}  // namespace

GradcheckResult Gradcheck(const std::function<Var(Graph<double> &)> &f,
                          std::span<Parameter<double> *const> params,
                          const GradcheckOptions &options) {
  for (auto *p : params) p->ZeroGrad();
  {
    Graph<double> g;
    Var out = f(g);
    if (g.value(out).size() != 1) {
      throw DimensionError("gradcheck: function must return a scalar");
    }
    if (!std::isfinite(g.scalar(out))) {
      throw DomainError("gradcheck: non-finite function value");
    }
    g.Backward(out);
  }

  GradcheckResult result;
  Rng rng(options.seed);
  for (auto *p : params) {
    const auto n = static_cast<std::size_t>(p->value.size());
    std::vector<std::size_t> coords(n);
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (n > options.max_coords_per_param) {
      rng.Shuffle(coords.begin(), coords.end());
      coords.resize(options.max_coords_per_param);
      std::sort(coords.begin(), coords.end());
    }
    const Matrix<double> analytic = p->grad;
    for (std::size_t c : coords) {
      double &x = p->value.data()[c];
      const double saved = x;
      x = saved + options.step;
      const double up = Evaluate(f);
      x = saved - options.step;
      const double down = Evaluate(f);
      x = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic.data()[c];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double err = std::abs(a - numeric) / denom;
      if (options.skip_kinks && err > 1e-6) {
        const double half = 0.5 * options.step;
        x = saved + half;
        const double up2 = Evaluate(f);
        x = saved - half;
        const double down2 = Evaluate(f);
        x = saved;
        const double numeric2 = (up2 - down2) / (2.0 * half);
        // On a smooth stretch both estimates agree far more closely than
        // either agrees with a wrong analytic gradient.
        const double roundoff = 1e-15 * std::max(std::abs(up), std::abs(down)) / half;
        const double drift = std::abs(numeric - numeric2);
        if (drift > 0.1 * std::abs(a - numeric) && drift > 100.0 * roundoff) {
          ++result.kinks_skipped;
          continue;
        }
      }
      ++result.coords_checked;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = p->name + "[" + std::to_string(c) + "]";
      }
    }
  }
  return result;
}

}  // namespace drp::ad
