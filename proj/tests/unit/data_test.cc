//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "drp/chem/junction_tree.h"
#include "drp/chem/smiles.h"
#include "drp/common/csv.h"
#include "drp/common/error.h"
#include "drp/data/config.h"
#include "drp/data/expression.h"
#include "drp/data/response.h"
#include "drp/data/synth.h"

namespace drp::data {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("drp_data_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path Write(const std::string &name, const std::string &text) const {
    WriteTextFile(path_ / name, text);
    return path_ / name;
  }
  const fs::path &path() const { return path_; }

 private:
  fs::path path_;
};

ExpressionMatrix Toy(const std::vector<std::string> &genes, const std::vector<std::string> &lines,
                     const std::vector<std::vector<double>> &rows) {
  ExpressionMatrix m;
  m.genes = genes;
  m.cell_lines = lines;
  for (const auto &l : lines) m.tissues.push_back(TissueFromCellLine(l));
  m.values.resize(static_cast<Eigen::Index>(genes.size()), static_cast<Eigen::Index>(lines.size()));
  for (std::size_t g = 0; g < rows.size(); ++g) {
    for (std::size_t l = 0; l < rows[g].size(); ++l) m.values(g, l) = rows[g][l];
  }
  return m;
}

SynthConfig SmallSynth() {
  SynthConfig c;
  c.n_lines = 16;
  c.n_genes = 40;
  c.n_drugs = 16;
  c.n_cgc_low_mean = 5;
  c.n_cgc_low_std = 5;
  c.n_noise_genes = 10;
  c.n_noise_low = 5;
  return c;
}

TEST(ExpressionTest, LoadsToyMatrix) {
  TempDir dir;
  const auto path = dir.Write("e.csv", "gene,AU565_BREAST,X_HAEMATOPOIETIC_AND_LYMPHOID_TISSUE\n"
                                       "TP53,1.5,2\nBRCA1,0,3.25\n");
  const ExpressionMatrix m = LoadExpression(path);
  EXPECT_EQ(m.num_genes(), 2u);
  EXPECT_EQ(m.num_lines(), 2u);
  EXPECT_EQ(m.tissues[0], "BREAST");
  EXPECT_EQ(m.tissues[1], "HALT");
  EXPECT_DOUBLE_EQ(m.values(1, 1), 3.25);
}

TEST(ExpressionTest, TissueToken) {
  EXPECT_EQ(TissueFromCellLine("AU565_BREAST"), "BREAST");
  EXPECT_EQ(TissueFromCellLine("X_HAEMATOPOIETIC_AND_LYMPHOID_TISSUE"), "HALT");
  EXPECT_EQ(TissueFromCellLine("A_LARGE_INTESTINE"), "LARGE_INTESTINE");
  EXPECT_THROW(TissueFromCellLine("NOTISSUE"), DataError);
  EXPECT_THROW(TissueFromCellLine("TRAILING_"), DataError);
}

TEST(ExpressionTest, MalformedFilesNameTheLocation) {
  TempDir dir;
  auto expect_error = [&](const std::string &text, const std::string &fragment) {
    const auto path = dir.Write("bad.csv", text);
    try {
      LoadExpression(path);
      ADD_FAILURE() << "no error for " << text;
    } catch (const DataError &e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  expect_error("gene,A_B,C_D\nG1,1\n", "line 2");
  expect_error("gene,A_B,C_D\nG1,1,x\n", "column 3");
  expect_error("gene,A_B,C_D\nG1,1,2\nG1,3,4\n", "line 3");
  expect_error("gene,A_B,A_B\nG1,1,2\n", "column 3");
  expect_error("gene,A_B,C_D\nG1,1,-2\n", "line 2");
}

TEST(ExpressionTest, ReserializationIsBitExact) {
  TempDir dir;
  const SyntheticData data = Synthesize(SmallSynth());
  const auto path = dir.Write("e.csv", FormatExpressionCsv(data.expression));
  const ExpressionMatrix back = LoadExpression(path);
  ASSERT_EQ(back.genes, data.expression.genes);
  ASSERT_EQ(back.cell_lines, data.expression.cell_lines);
  for (Eigen::Index i = 0; i < back.values.size(); ++i) {
    ASSERT_EQ(back.values.data()[i], data.expression.values.data()[i]);
  }
  EXPECT_EQ(FormatExpressionCsv(back), FormatExpressionCsv(data.expression));
}

TEST(FilterTest, RuleExamples) {
  const ExpressionMatrix m = Toy({"ABSENT", "FLAT", "KEEP", "LOW"}, {"A_X", "B_X", "C_X"},
                                 {{5, 6, 9}, {2, 2, 2}, {0.5, 1.5, 3.0}, {0.1, 0.2, 0.3}});
  const std::set<std::string> cgc = {"FLAT", "KEEP", "LOW"};
  const auto [out, report] = FilterGenes(m, &cgc);
  EXPECT_EQ(out.genes, std::vector<std::string>{"KEEP"});
  EXPECT_EQ(report.kept, std::vector<std::string>{"KEEP"});
  EXPECT_EQ(report.dropped_not_in_cgc, std::vector<std::string>{"ABSENT"});
  EXPECT_EQ(report.dropped_low_mean, std::vector<std::string>{"LOW"});
  EXPECT_EQ(report.dropped_low_std, std::vector<std::string>{"FLAT"});
  EXPECT_EQ(report.ToCsv(m.genes),
            "gene,status\nABSENT,not_in_cgc\nFLAT,low_std\nKEEP,kept\nLOW,low_mean\n");
}

TEST(FilterTest, EmptyResultAdvisesThresholdReview) {
  const ExpressionMatrix m = Toy({"G"}, {"A_X", "B_X"}, {{2, 2}});
  try {
    FilterGenes(m, nullptr);
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("threshold"), std::string::npos);
  }
}

TEST(FilterTest, ReportPartitionsAndIsIdempotent) {
  const SyntheticData data = Synthesize(SynthConfig{});
  const auto [once, report] = FilterGenes(data.expression, &data.cgc);
  EXPECT_EQ(report.kept.size() + report.dropped_not_in_cgc.size() + report.dropped_low_mean.size() +
                report.dropped_low_std.size(),
            data.expression.num_genes());
  EXPECT_EQ(once.num_genes(), 597u);
  const auto [twice, report2] = FilterGenes(once, &data.cgc);
  EXPECT_EQ(twice.genes, once.genes);
  EXPECT_EQ(twice.values, once.values);
  EXPECT_TRUE(report2.dropped_low_mean.empty());
}

TEST(SelectTest, TissueSelection) {
  const ExpressionMatrix m = Toy({"G"}, {"A_BREAST", "B_LUNG", "C_BREAST"}, {{1, 2, 3}});
  const ExpressionMatrix s = SelectTissue(m, "BREAST");
  EXPECT_EQ(s.cell_lines, (std::vector<std::string>{"A_BREAST", "C_BREAST"}));
  EXPECT_DOUBLE_EQ(s.values(0, 1), 3.0);
  EXPECT_THROW(SelectTissue(m, "SKIN"), DataError);
  EXPECT_THROW(SelectTissue(m, ""), DataError);
}

TEST(JoinTest, AllResolvable) {
  const ExpressionMatrix m = Toy({"G"}, {"A_X", "B_X"}, {{1, 2}});
  const std::vector<GdscRow> rows = {{"D1", "A_X", 0.5, 2}, {"D2", "B_X", -1.0, 3}};
  const std::vector<DrugEntry> drugs = {{"D1", "CC"}, {"D2", "c1ccccc1"}};
  const ResponseDataset ds = JoinResponse(m, rows, drugs);
  EXPECT_EQ(ds.records.size(), 2u);
  EXPECT_TRUE(ds.dropped.empty());
  EXPECT_EQ(ds.records[1].smiles, "c1ccccc1");
}

TEST(JoinTest, DropReasons) {
  const ExpressionMatrix m = Toy({"G"}, {"A_X"}, {{1}});
  const std::vector<GdscRow> rows = {
      {"D1", "A_X", 0.5, 2}, {"D1", "Z_X", 0.5, 3}, {"D9", "A_X", 0.5, 4}, {"D2", "A_X", 0.5, 5}};
  const std::vector<DrugEntry> drugs = {{"D1", "CC"}, {"D2", "C1CC"}};
  const ResponseDataset ds = JoinResponse(m, rows, drugs);
  ASSERT_EQ(ds.records.size(), 1u);
  ASSERT_EQ(ds.dropped.size(), 3u);
  EXPECT_EQ(ds.dropped[0].reason, "cell line missing");
  EXPECT_EQ(ds.dropped[0].line, 3u);
  EXPECT_EQ(ds.dropped[1].reason, "drug missing");
  EXPECT_EQ(ds.dropped[2].reason, "smiles unparseable");
  EXPECT_THROW(JoinResponse(m, {{"D1", "Z_X", 0.5, 2}}, drugs), DataError);
}

TEST(JoinTest, NeverContainsUnknownLines) {
  const SyntheticData data = Synthesize(SmallSynth());
  std::vector<GdscRow> rows = data.responses;
  rows.push_back({"DRUG01", "GHOST_LINE", 1.0, 0});
  const ResponseDataset ds = JoinResponse(data.expression, rows, data.drugs);
  for (const auto &r : ds.records) EXPECT_GE(data.expression.LineIndex(r.cell_line), 0);
  EXPECT_EQ(ds.records.size(), data.responses.size());
}

TEST(SplitTest, PartitionWithinOneRecordOfRatio) {
  for (std::size_t n : {20u, 41u, 100u, 1836u}) {
    ResponseDataset ds;
    ds.records.resize(n);
    AssignSplits(ds, {18, 1, 1}, 11);
    const double total = static_cast<double>(n);
    const std::size_t train = ds.Indices(Split::kTrain).size();
    const std::size_t valid = ds.Indices(Split::kValid).size();
    const std::size_t test = ds.Indices(Split::kTest).size();
    EXPECT_EQ(train + valid + test, n);
    EXPECT_LE(std::abs(train - total * 18 / 20), 1.0);
    EXPECT_LE(std::abs(valid - total / 20), 1.0);
    EXPECT_LE(std::abs(test - total / 20), 1.0);
  }
}

TEST(SplitTest, SeededAndByCellLine) {
  const SyntheticData data = Synthesize(SmallSynth());
  ResponseDataset a = JoinResponse(data.expression, data.responses, data.drugs);
  ResponseDataset b = a;
  AssignSplits(a, {18, 1, 1}, 3);
  AssignSplits(b, {18, 1, 1}, 3);
  for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_EQ(a.records[i].split, b.records[i].split);
  AssignSplits(a, {8, 1, 1}, 3, true);
  std::map<std::string, Split> seen;
  for (const auto &r : a.records) {
    auto [it, inserted] = seen.emplace(r.cell_line, r.split);
    EXPECT_EQ(it->second, r.split);
  }
}

TEST(SplitTest, IndexSplitKeepsBothSides) {
  const auto [train, valid] = SplitIndices(51, 0.1, 5);
  EXPECT_EQ(valid.size(), 5u);
  EXPECT_EQ(train.size(), 46u);
  const auto [t2, v2] = SplitIndices(2, 0.1, 5);
  EXPECT_EQ(t2.size(), 1u);
  EXPECT_EQ(v2.size(), 1u);
}

TEST(FileFormatTest, ResponseFilesRoundTrip) {
  TempDir dir;
  const SyntheticData data = Synthesize(SmallSynth());
  const auto gdsc = LoadGdsc(dir.Write("g.csv", FormatGdscCsv(data.responses)));
  ASSERT_EQ(gdsc.size(), data.responses.size());
  for (std::size_t i = 0; i < gdsc.size(); ++i) {
    EXPECT_EQ(gdsc[i].ln_ic50, data.responses[i].ln_ic50);
    EXPECT_EQ(gdsc[i].cell_line, data.responses[i].cell_line);
  }
  const auto drugs = LoadDrugTable(dir.Write("d.csv", FormatDrugTableCsv(data.drugs)));
  ASSERT_EQ(drugs.size(), data.drugs.size());
  EXPECT_EQ(drugs[3].smiles, data.drugs[3].smiles);
  EXPECT_THROW(LoadDrugTable(dir.Write("dup.csv", "drug_id,smiles\nA,CC\nA,CCC\n")), DataError);
  EXPECT_THROW(LoadGdsc(dir.Write("bad.csv", "drug_id,cell_line,ln_ic50\nA,B,x\n")), DataError);
}

TEST(SynthTest, SameSeedIsBitIdentical) {
  TempDir dir;
  const SyntheticData a = Synthesize(SynthConfig{});
  const SyntheticData b = Synthesize(SynthConfig{});
  const auto pa = WriteSynthetic(dir.path() / "a", a);
  const auto pb = WriteSynthetic(dir.path() / "b", b);
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(ReadLines(pa[i]), ReadLines(pb[i])) << pa[i];
  }
  SynthConfig other;
  other.seed = 8;
  EXPECT_NE(FormatGdscCsv(Synthesize(other).responses), FormatGdscCsv(a.responses));
}

TEST(SynthTest, ShapesMatchRequest) {
  const SyntheticData data = Synthesize(SynthConfig{});
  EXPECT_EQ(data.expression.num_lines(), 51u);
  EXPECT_EQ(data.drugs.size(), 40u);
  std::set<std::string> tissues(data.expression.tissues.begin(), data.expression.tissues.end());
  EXPECT_EQ(tissues.size(), 8u);
  EXPECT_TRUE(tissues.count("HALT"));
  EXPECT_NEAR(static_cast<double>(data.responses.size()), 51 * 40 * 0.9, 1.0);
  EXPECT_THROW(Synthesize(SynthConfig{.n_lines = 1}), DomainError);
}

TEST(SynthTest, SmilesParseAndDecompose) {
  const SyntheticData data = Synthesize(SynthConfig{});
  std::set<std::string> unique;
  for (const auto &d : data.drugs) {
    const auto g = chem::ParseSmiles(d.smiles);
    const auto t = chem::Decompose(g);
    EXPECT_TRUE(chem::ValidateJunctionTree(g, t).empty()) << d.smiles;
    unique.insert(d.smiles);
  }
  EXPECT_EQ(unique.size(), data.drugs.size());
}

TEST(SynthTest, PlantedFunctionExplainsAllButNoise) {
  const SyntheticData data = Synthesize(SynthConfig{});
  double mean = 0.0;
  for (const auto &r : data.responses) mean += r.ln_ic50;
  mean /= static_cast<double>(data.responses.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < data.responses.size(); ++i) {
    const double y = data.responses[i].ln_ic50;
    ss_res += (y - data.planted[i]) * (y - data.planted[i]);
    ss_tot += (y - mean) * (y - mean);
  }
  const double r2 = 1.0 - ss_res / ss_tot;
  const double noise_share = 0.3 * 0.3 * static_cast<double>(data.responses.size()) / ss_tot;
  EXPECT_NEAR(r2, 1.0 - noise_share, 0.01);
  EXPECT_GT(r2, 0.9);
}

TEST(ConfigTest, ParsesSectionsAndTypes) {
  const Config c = Config::Parse(
      "seed = 7 # comment\n"
      "[data]\n"
      "expression = \"a # b.csv\"\n"
      "min_std = 0.5\n"
      "split = [18, 1, 1]\n"
      "[train]\n"
      "sigma_branch = false\n");
  EXPECT_EQ(c.GetInt("seed", 0), 7);
  EXPECT_EQ(c.GetString("data.expression", ""), "a # b.csv");
  EXPECT_DOUBLE_EQ(c.GetDouble("data.min_std", 0), 0.5);
  EXPECT_DOUBLE_EQ(c.GetDouble("seed", 0), 7.0);
  EXPECT_EQ(c.GetIntArray("data.split", {}), (std::vector<std::int64_t>{18, 1, 1}));
  EXPECT_FALSE(c.GetBool("train.sigma_branch", true));
  EXPECT_EQ(c.GetInt("missing", 3), 3);
  EXPECT_THROW(c.GetInt("data.expression", 0), DataError);
}

TEST(ConfigTest, OverridesWinAndCanonicalIsSorted) {
  Config c = Config::Parse("[a]\nx = 1\ny = \"s\"\n");
  c.Set("a.x", "2");
  c.Set("a.z", "plain text");
  EXPECT_EQ(c.GetInt("a.x", 0), 2);
  EXPECT_EQ(c.GetString("a.z", ""), "plain text");
  EXPECT_EQ(c.Canonical(), "a.x = 2\na.y = \"s\"\na.z = \"plain text\"\n");
}

TEST(ConfigTest, MalformedLinesNameTheLine) {
  for (const char *text : {"x\n", "[a\n", "x = \"open\n", "x = 1\nx = 2\n", "= 3\n", "x = [1, [2]]\n"}) {
    EXPECT_THROW(Config::Parse(text), DataError) << text;
  }
  try {
    Config::Parse("a = 1\n\nb = ?\n");
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

}  // namespace
}  // namespace drp::data
