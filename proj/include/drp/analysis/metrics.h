//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_ANALYSIS_METRICS_H_
#define DRP_ANALYSIS_METRICS_H_

#include <cstddef>
#include <span>
#include <string>

#include "drp/common/error.h"

namespace drp::analysis {

struct MetricReport {
  std::string label;
  double r2 = 0.0;
  double rmse = 0.0;
  std::size_t count = 0;
};

// Thrown by R2Rmse for constant truth; the report still carries the RMSE.
class R2Undefined : public DomainError {
 public:
  explicit R2Undefined(MetricReport report)
      : DomainError("R2 is undefined for constant targets"), report_(std::move(report)) {}
  const MetricReport &report() const noexcept { return report_; }

 private:
  MetricReport report_;
};

// R2 = 1 - sum (p - t)^2 / sum (t - mean t)^2, RMSE = sqrt(mean (p - t)^2).
// Throws DimensionError for unequal or zero lengths.
MetricReport R2Rmse(std::span<const double> pred, std::span<const double> truth,
                    std::string label = "");

// Euclidean norm of a - b. Throws DimensionError for unequal widths.
double LatentDistance(std::span<const double> a, std::span<const double> b);

}  // namespace drp::analysis

#endif  // DRP_ANALYSIS_METRICS_H_
