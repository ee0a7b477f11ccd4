//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_COMMON_CSV_H_
#define DRP_COMMON_CSV_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drp {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

// Splits one CSV record. Double-quoted fields may contain commas and "".
std::vector<std::string> SplitCsvLine(std::string_view line);

// Reads a CSV file with a header row. Blank lines are skipped; every row must
// have as many fields as the header.
CsvTable ReadCsv(const std::filesystem::path &path);

// Quotes a field when it contains a comma, quote or newline.
std::string CsvField(std::string_view s);

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double v);

std::optional<double> TryParseDouble(std::string_view s);

// Reads whole lines, stripping a trailing '\r'.
std::vector<std::string> ReadLines(const std::filesystem::path &path);

void WriteTextFile(const std::filesystem::path &path, std::string_view content);

}  // namespace drp

#endif  // DRP_COMMON_CSV_H_
