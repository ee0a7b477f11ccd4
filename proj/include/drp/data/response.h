//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_DATA_RESPONSE_H_
#define DRP_DATA_RESPONSE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "drp/data/expression.h"

namespace drp::data {

enum class Split : std::uint8_t { kTrain, kValid, kTest };
const char *SplitName(Split s);

struct GdscRow {
  std::string drug_id;
  std::string cell_line;
  double ln_ic50 = 0.0;
  std::size_t line = 0;  // source line, 0 for in-memory rows
};

struct DrugEntry {
  std::string drug_id;
  std::string smiles;
};

struct ResponseRecord {
  std::string cell_line;
  std::string drug_id;
  std::string smiles;
  double ln_ic50 = 0.0;
  Split split = Split::kTrain;
};

struct DroppedRow {
  std::size_t line;
  std::string drug_id;
  std::string cell_line;
  std::string reason;
};

struct ResponseDataset {
  std::vector<ResponseRecord> records;
  std::vector<DroppedRow> dropped;
  std::string provenance;

  std::vector<int> Indices(Split s) const;
};

// drug_id,cell_line,ln_ic50
std::vector<GdscRow> LoadGdsc(const std::filesystem::path &path);
std::string FormatGdscCsv(const std::vector<GdscRow> &rows);
// drug_id,smiles
std::vector<DrugEntry> LoadDrugTable(const std::filesystem::path &path);
std::string FormatDrugTableCsv(const std::vector<DrugEntry> &drugs);

// Inner join on cell lines present in expr and drugs whose SMILES parse.
// Dropped rows carry the reason "cell line missing", "drug missing" or
// "smiles unparseable". Throws DataError when nothing joins.
ResponseDataset JoinResponse(const ExpressionMatrix &expr, const std::vector<GdscRow> &rows,
                             const std::vector<DrugEntry> &drugs);

// Seeded split in the given train:valid:test ratio. Per record by default;
// with by_cell_line every record of a cell line lands in the same split.
// Per-record counts are within one record of the exact ratio.
// cell_line,drug_id,smiles,ln_ic50,split
std::string FormatDatasetCsv(const ResponseDataset &dataset);
// line,drug_id,cell_line,reason
std::string FormatDroppedCsv(const std::vector<DroppedRow> &dropped);

void AssignSplits(ResponseDataset &dataset, std::array<int, 3> ratio, std::uint64_t seed,
                  bool by_cell_line = false);

// Shuffled index partition of n items into (train, valid) with
// round(n * valid_fraction) validation items, at least one of each when n >= 2.
std::pair<std::vector<int>, std::vector<int>> SplitIndices(std::size_t n, double valid_fraction,
                                                           std::uint64_t seed);

}  // namespace drp::data

#endif  // DRP_DATA_RESPONSE_H_
