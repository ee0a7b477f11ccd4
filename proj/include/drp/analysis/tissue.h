//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_ANALYSIS_TISSUE_H_
#define DRP_ANALYSIS_TISSUE_H_

#include <map>
#include <string>

#include "drp/data/expression.h"

namespace drp::analysis {

std::map<std::string, int> TissueCounts(const data::ExpressionMatrix &m);

// Keeps the cell lines whose tissue occurs at least min_count times
// (inclusive). Throws DataError when nothing is left.
data::ExpressionMatrix TissueThresholdFilter(const data::ExpressionMatrix &m, int min_count = 30);

}  // namespace drp::analysis

#endif  // DRP_ANALYSIS_TISSUE_H_
