//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/data/expression.h"

#include <cmath>
#include <unordered_set>

#include "drp/common/csv.h"
#include "drp/common/error.h"

namespace drp::data {

int ExpressionMatrix::LineIndex(std::string_view id) const {
  for (std::size_t i = 0; i < cell_lines.size(); ++i) {
    if (cell_lines[i] == id) return static_cast<int>(i);
  }
  return -1;
}

std::string TissueFromCellLine(std::string_view id) {
  const auto underscore = id.find('_');
  if (underscore == std::string_view::npos || underscore + 1 == id.size()) {
    throw DataError("cell line id without tissue suffix: " + std::string(id));
  }
  std::string tissue(id.substr(underscore + 1));
  if (tissue == kHaematopoieticLabel) return "HALT";
  return tissue;
}

ExpressionMatrix LoadExpression(const std::filesystem::path &path) {
  const CsvTable table = ReadCsv(path);
  if (table.header.size() < 2) throw DataError(path.string() + ": no cell-line columns");
  ExpressionMatrix m;
  std::unordered_set<std::string> seen;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    const std::string &id = table.header[c];
    if (!seen.insert(id).second) {
      throw DataError(path.string() + ": duplicate cell line '" + id + "' in column " +
                      std::to_string(c + 1));
    }
    m.cell_lines.push_back(id);
    m.tissues.push_back(TissueFromCellLine(id));
  }
  const auto rows = static_cast<Eigen::Index>(table.rows.size());
  const auto cols = static_cast<Eigen::Index>(m.cell_lines.size());
  m.values.resize(rows, cols);
  seen.clear();
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto &row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (!seen.insert(row[0]).second) {
      throw DataError(path.string() + ": duplicate gene '" + row[0] + "' on line " +
                      std::to_string(line));
    }
    m.genes.push_back(row[0]);
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto v = TryParseDouble(row[c + 1]);
      const std::string where = " on line " + std::to_string(line) + ", column " +
                                std::to_string(c + 2);
      if (!v || !std::isfinite(*v)) {
        throw DataError(path.string() + ": non-numeric value '" + row[c + 1] + "'" + where);
      }
      if (*v < 0.0) throw DataError(path.string() + ": negative expression value" + where);
      m.values(r, c) = *v;
    }
  }
  return m;
}

std::string FormatExpressionCsv(const ExpressionMatrix &m) {
  std::string out = "gene";
  for (const auto &id : m.cell_lines) out += "," + CsvField(id);
  out += "\n";
  for (std::size_t r = 0; r < m.genes.size(); ++r) {
    out += CsvField(m.genes[r]);
    for (Eigen::Index c = 0; c < m.values.cols(); ++c) {
      out += "," + FormatDouble(m.values(static_cast<Eigen::Index>(r), c));
    }
    out += "\n";
  }
  return out;
}

void SaveExpression(const std::filesystem::path &path, const ExpressionMatrix &m) {
  WriteTextFile(path, FormatExpressionCsv(m));
}

std::set<std::string> LoadGeneSet(const std::filesystem::path &path) {
  std::set<std::string> genes;
  for (const std::string &raw : ReadLines(path)) {
    const auto start = raw.find_first_not_of(" \t");
    if (start == std::string::npos || raw[start] == '#') continue;
    const auto end = raw.find_last_not_of(" \t");
    genes.insert(raw.substr(start, end - start + 1));
  }
  return genes;
}

std::string GeneFilterReport::ToCsv(const std::vector<std::string> &input_order) const {
  std::unordered_set<std::string> cgc(dropped_not_in_cgc.begin(), dropped_not_in_cgc.end());
  std::unordered_set<std::string> mean(dropped_low_mean.begin(), dropped_low_mean.end());
  std::unordered_set<std::string> stdev(dropped_low_std.begin(), dropped_low_std.end());
  std::string out = "gene,status\n";
  for (const auto &g : input_order) {
    const char *status = "kept";
    if (cgc.count(g)) {
      status = "not_in_cgc";
    } else if (mean.count(g)) {
      status = "low_mean";
    } else if (stdev.count(g)) {
      status = "low_std";
    }
    out += CsvField(g) + "," + status + "\n";
  }
  return out;
}

std::pair<ExpressionMatrix, GeneFilterReport> FilterGenes(const ExpressionMatrix &m,
                                                          const std::set<std::string> *cgc,
                                                          FilterThresholds thresholds) {
  if (m.num_genes() == 0 || m.num_lines() == 0) throw DataError("empty expression matrix");
  GeneFilterReport report;
  std::vector<int> keep;
  const double n = static_cast<double>(m.num_lines());
  for (std::size_t r = 0; r < m.num_genes(); ++r) {
    const std::string &gene = m.genes[r];
    if (cgc != nullptr && !cgc->contains(gene)) {
      report.dropped_not_in_cgc.push_back(gene);
      continue;
    }
    const auto row = m.values.row(static_cast<Eigen::Index>(r));
    const double mean = row.sum() / n;
    if (mean < thresholds.min_mean) {
      report.dropped_low_mean.push_back(gene);
      continue;
    }
    const double var = (row.array() - mean).square().sum() / n;
    if (std::sqrt(var) < thresholds.min_std) {
      report.dropped_low_std.push_back(gene);
      continue;
    }
    report.kept.push_back(gene);
    keep.push_back(static_cast<int>(r));
  }
  if (keep.empty()) {
    throw DataError("gene filter removed every gene; review the CGC list and the mean/std thresholds");
  }
  return {SelectGenes(m, keep), std::move(report)};
}

ExpressionMatrix SelectLines(const ExpressionMatrix &m, const std::vector<int> &columns) {
  ExpressionMatrix out;
  out.genes = m.genes;
  out.values.resize(m.values.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.cell_lines.push_back(m.cell_lines[columns[j]]);
    out.tissues.push_back(m.tissues[columns[j]]);
    out.values.col(static_cast<Eigen::Index>(j)) = m.values.col(columns[j]);
  }
  return out;
}

ExpressionMatrix SelectGenes(const ExpressionMatrix &m, const std::vector<int> &rows) {
  ExpressionMatrix out;
  out.cell_lines = m.cell_lines;
  out.tissues = m.tissues;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), m.values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.genes.push_back(m.genes[rows[i]]);
    out.values.row(static_cast<Eigen::Index>(i)) = m.values.row(rows[i]);
  }
  return out;
}

ExpressionMatrix SelectTissue(const ExpressionMatrix &m, std::string_view token) {
  if (token.empty()) throw DataError("empty tissue token");
  std::vector<int> columns;
  for (std::size_t c = 0; c < m.num_lines(); ++c) {
    if (m.tissues[c] == token) columns.push_back(static_cast<int>(c));
  }
  if (columns.empty()) throw DataError("no cell lines with tissue '" + std::string(token) + "'");
  return SelectLines(m, columns);
}

}  // namespace drp::data
