//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/analysis/metrics.h"

#include <cmath>

namespace drp::analysis {

MetricReport R2Rmse(std::span<const double> pred, std::span<const double> truth, std::string label) {
  if (pred.size() != truth.size() || pred.empty()) {
    throw DimensionError("metrics need equal, non-zero lengths");
  }
  const double n = static_cast<double>(truth.size());
  double mean = 0.0;
  for (double t : truth) mean += t;
  mean /= n;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  MetricReport r;
  r.label = std::move(label);
  r.count = truth.size();
  r.rmse = std::sqrt(ss_res / n);
  if (ss_tot == 0.0) throw R2Undefined(r);
  r.r2 = 1.0 - ss_res / ss_tot;
  return r;
}

double LatentDistance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("latent widths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace drp::analysis
