//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_DATA_EXPRESSION_H_
#define DRP_DATA_EXPRESSION_H_

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace drp::data {

// Genes x cell lines of log2(tpm + 1) values.
struct ExpressionMatrix {
  std::vector<std::string> genes;
  std::vector<std::string> cell_lines;
  std::vector<std::string> tissues;  // one per cell line
  Eigen::MatrixXd values;            // genes x cell lines

  std::size_t num_genes() const { return genes.size(); }
  std::size_t num_lines() const { return cell_lines.size(); }
  // -1 when absent.
  int LineIndex(std::string_view id) const;
};

inline constexpr std::string_view kHaematopoieticLabel = "HAEMATOPOIETIC_AND_LYMPHOID_TISSUE";

// Text after the first underscore; the haematopoietic label becomes "HALT".
// Throws DataError when there is no non-empty suffix.
std::string TissueFromCellLine(std::string_view id);

// CSV with a header of cell-line ids after a first gene-id column. Ragged
// rows, non-numeric or negative cells and duplicate ids throw DataError with
// the line (and column) involved.
ExpressionMatrix LoadExpression(const std::filesystem::path &path);
std::string FormatExpressionCsv(const ExpressionMatrix &m);
void SaveExpression(const std::filesystem::path &path, const ExpressionMatrix &m);

// One gene symbol per line; blank lines and '#' comments are skipped.
std::set<std::string> LoadGeneSet(const std::filesystem::path &path);

struct FilterThresholds {
  double min_mean = 1.0;
  double min_std = 0.5;  // population standard deviation
};

struct GeneFilterReport {
  std::vector<std::string> kept;
  std::vector<std::string> dropped_not_in_cgc;
  std::vector<std::string> dropped_low_mean;
  std::vector<std::string> dropped_low_std;

  // gene,status lines in input order.
  std::string ToCsv(const std::vector<std::string> &input_order) const;
};

// Keeps genes present in cgc, then drops genes with mean < min_mean, then
// genes with standard deviation < min_std. A gene is reported under the
// first rule that removes it. With cgc == nullptr the CGC step is skipped.
// Throws DataError when nothing survives.
std::pair<ExpressionMatrix, GeneFilterReport> FilterGenes(const ExpressionMatrix &m,
                                                          const std::set<std::string> *cgc,
                                                          FilterThresholds thresholds = {});

ExpressionMatrix SelectLines(const ExpressionMatrix &m, const std::vector<int> &columns);
ExpressionMatrix SelectGenes(const ExpressionMatrix &m, const std::vector<int> &rows);

// Columns whose tissue equals token; throws DataError on an empty token or
// no match.
ExpressionMatrix SelectTissue(const ExpressionMatrix &m, std::string_view token);

}  // namespace drp::data

#endif  // DRP_DATA_EXPRESSION_H_
