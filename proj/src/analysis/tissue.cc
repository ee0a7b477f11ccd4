//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/analysis/tissue.h"

#include <vector>

#include "drp/common/error.h"

namespace drp::analysis {

std::map<std::string, int> TissueCounts(const data::ExpressionMatrix &m) {
  std::map<std::string, int> counts;
  for (const auto &t : m.tissues) ++counts[t];
  return counts;
}

data::ExpressionMatrix TissueThresholdFilter(const data::ExpressionMatrix &m, int min_count) {
  const auto counts = TissueCounts(m);
  std::vector<int> keep;
  for (std::size_t i = 0; i < m.tissues.size(); ++i) {
    if (counts.at(m.tissues[i]) >= min_count) keep.push_back(static_cast<int>(i));
  }
  if (keep.empty()) {
    throw DataError("no tissue has at least " + std::to_string(min_count) + " cell lines");
  }
  return data::SelectLines(m, keep);
}

}  // namespace drp::analysis
