//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/data/response.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "drp/chem/smiles.h"
#include "drp/common/csv.h"
#include "drp/common/error.h"
#include "drp/common/rng.h"

namespace drp::data {
namespace {

std::size_t Column(const CsvTable &table, const std::string &name,
                   const std::filesystem::path &path) {
  auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) {
    throw DataError(path.string() + ": missing column '" + name + "'");
  }
  return static_cast<std::size_t>(it - table.header.begin());
}

// Counts per split from largest remainders so the total is exact.
std::array<std::size_t, 3> SplitCounts(std::size_t n, std::array<int, 3> ratio) {
  const int total = ratio[0] + ratio[1] + ratio[2];
  if (total <= 0 || ratio[0] < 0 || ratio[1] < 0 || ratio[2] < 0) {
    throw DataError("invalid split ratio");
  }
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = static_cast<double>(n) * ratio[k] / total;
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    remainder[k] = exact - std::floor(exact);
    assigned += counts[k];
  }
  while (assigned < n) {
    int best = 0;
    for (int k = 1; k < 3; ++k) {
      if (remainder[k] > remainder[best]) best = k;
    }
    ++counts[best];
    remainder[best] = -1.0;
    ++assigned;
  }
  return counts;
}

}  // namespace

const char *SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "train";
}

std::vector<int> ResponseDataset::Indices(Split s) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == s) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<GdscRow> LoadGdsc(const std::filesystem::path &path) {
  const CsvTable table = ReadCsv(path);
  const std::size_t drug = Column(table, "drug_id", path);
  const std::size_t line = Column(table, "cell_line", path);
  const std::size_t value = Column(table, "ln_ic50", path);
  std::vector<GdscRow> rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto v = TryParseDouble(table.rows[r][value]);
    if (!v || !std::isfinite(*v)) {
      throw DataError(path.string() + ": non-numeric ln_ic50 on line " +
                      std::to_string(table.line_numbers[r]));
    }
    rows.push_back({table.rows[r][drug], table.rows[r][line], *v, table.line_numbers[r]});
  }
  return rows;
}

std::string FormatGdscCsv(const std::vector<GdscRow> &rows) {
  std::string out = "drug_id,cell_line,ln_ic50\n";
  for (const auto &r : rows) {
    out += CsvField(r.drug_id) + "," + CsvField(r.cell_line) + "," + FormatDouble(r.ln_ic50) + "\n";
  }
  return out;
}

std::vector<DrugEntry> LoadDrugTable(const std::filesystem::path &path) {
  const CsvTable table = ReadCsv(path);
  const std::size_t id = Column(table, "drug_id", path);
  const std::size_t smiles = Column(table, "smiles", path);
  std::vector<DrugEntry> drugs;
  std::map<std::string, std::size_t> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (!seen.emplace(table.rows[r][id], r).second) {
      throw DataError(path.string() + ": duplicate drug id '" + table.rows[r][id] + "' on line " +
                      std::to_string(table.line_numbers[r]));
    }
    drugs.push_back({table.rows[r][id], table.rows[r][smiles]});
  }
  return drugs;
}

std::string FormatDrugTableCsv(const std::vector<DrugEntry> &drugs) {
  std::string out = "drug_id,smiles\n";
  for (const auto &d : drugs) out += CsvField(d.drug_id) + "," + CsvField(d.smiles) + "\n";
  return out;
}

ResponseDataset JoinResponse(const ExpressionMatrix &expr, const std::vector<GdscRow> &rows,
                             const std::vector<DrugEntry> &drugs) {
  std::unordered_map<std::string, int> lines;
  for (std::size_t i = 0; i < expr.cell_lines.size(); ++i) lines.emplace(expr.cell_lines[i], i);
  std::unordered_map<std::string, const DrugEntry *> drug_by_id;
  std::unordered_map<std::string, bool> parses;
  for (const auto &d : drugs) {
    drug_by_id.emplace(d.drug_id, &d);
    bool ok = true;
    try {
      chem::ParseSmiles(d.smiles);
    } catch (const ParseError &) {
      ok = false;
    }
    parses.emplace(d.drug_id, ok);
  }
  ResponseDataset out;
  for (const auto &row : rows) {
    if (!lines.contains(row.cell_line)) {
      out.dropped.push_back({row.line, row.drug_id, row.cell_line, "cell line missing"});
      continue;
    }
    auto it = drug_by_id.find(row.drug_id);
    if (it == drug_by_id.end()) {
      out.dropped.push_back({row.line, row.drug_id, row.cell_line, "drug missing"});
      continue;
    }
    if (!parses[row.drug_id]) {
      out.dropped.push_back({row.line, row.drug_id, row.cell_line, "smiles unparseable"});
      continue;
    }
    out.records.push_back({row.cell_line, row.drug_id, it->second->smiles, row.ln_ic50, Split::kTrain});
  }
  if (out.records.empty()) throw DataError("response join produced no records");
  out.provenance = "joined " + std::to_string(out.records.size()) + " of " +
                   std::to_string(rows.size()) + " response rows";
  return out;
}

std::string FormatDatasetCsv(const ResponseDataset &dataset) {
  std::string out = "cell_line,drug_id,smiles,ln_ic50,split\n";
  for (const auto &r : dataset.records) {
    out += CsvField(r.cell_line) + "," + CsvField(r.drug_id) + "," + CsvField(r.smiles) + "," +
           FormatDouble(r.ln_ic50) + "," + SplitName(r.split) + "\n";
  }
  return out;
}

std::string FormatDroppedCsv(const std::vector<DroppedRow> &dropped) {
  std::string out = "line,drug_id,cell_line,reason\n";
  for (const auto &d : dropped) {
    out += std::to_string(d.line) + "," + CsvField(d.drug_id) + "," + CsvField(d.cell_line) + "," +
           CsvField(d.reason) + "\n";
  }
  return out;
}

void AssignSplits(ResponseDataset &dataset, std::array<int, 3> ratio, std::uint64_t seed,
                  bool by_cell_line) {
  Rng rng(seed);
  const std::array<Split, 3> kinds{Split::kTrain, Split::kValid, Split::kTest};
  if (!by_cell_line) {
    std::vector<int> order(dataset.records.size());
    std::iota(order.begin(), order.end(), 0);
    rng.Shuffle(order.begin(), order.end());
    const auto counts = SplitCounts(order.size(), ratio);
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
      for (std::size_t i = 0; i < counts[k]; ++i) dataset.records[order[pos++]].split = kinds[k];
    }
    return;
  }
  std::vector<std::string> lines;
  for (const auto &r : dataset.records) lines.push_back(r.cell_line);
  std::sort(lines.begin(), lines.end());
  lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
  rng.Shuffle(lines.begin(), lines.end());
  const auto counts = SplitCounts(lines.size(), ratio);
  std::map<std::string, Split> assignment;
  std::size_t pos = 0;
  for (int k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < counts[k]; ++i) assignment[lines[pos++]] = kinds[k];
  }
  for (auto &r : dataset.records) r.split = assignment[r.cell_line];
}

std::pair<std::vector<int>, std::vector<int>> SplitIndices(std::size_t n, double valid_fraction,
                                                           std::uint64_t seed) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.Shuffle(order.begin(), order.end());
  std::size_t n_valid = static_cast<std::size_t>(std::llround(valid_fraction * n));
  if (n >= 2) n_valid = std::clamp<std::size_t>(n_valid, 1, n - 1);
  std::vector<int> valid(order.begin(), order.begin() + n_valid);
  std::vector<int> train(order.begin() + n_valid, order.end());
  std::sort(valid.begin(), valid.end());
  std::sort(train.begin(), train.end());
  return {train, valid};
}

}  // namespace drp::data
