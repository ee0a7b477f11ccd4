//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

// Runs the drp binary as a subprocess and checks exit codes and outputs.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "drp/common/hash.h"

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("drp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Exit status of `drp <args>`; stdout and stderr are discarded.
  int Drp(const std::string &args, const std::string &env = "") const {
    const std::string cmd =
        env + " " + DRP_CLI + " " + args + " >" + (dir_ / "stdout").string() + " 2>" +
        (dir_ / "stderr").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string Read(const fs::path &p) const {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string Path(const std::string &name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, HelpExitsZero) {
  EXPECT_EQ(Drp("--help"), 0);
  EXPECT_NE(Read(dir_ / "stdout").find("train-predictor"), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(Drp("no-such-command"), 1);
  EXPECT_EQ(Drp(""), 1);
  EXPECT_EQ(Drp("synth --set novalue --out " + Path("o")), 1);
  EXPECT_EQ(Drp("predict --model x"), 1);  // required options missing
}

TEST_F(CliTest, MissingInputExitsTwo) {
  EXPECT_EQ(Drp("predict --model " + Path("none.ckpt") + " --expression x --pairs y --out " +
                Path("o")),
            2);
  EXPECT_NE(Read(dir_ / "stderr").find("level=error"), std::string::npos);
}

TEST_F(CliTest, SynthIsByteIdenticalAndWritesManifest) {
  ASSERT_EQ(Drp("synth --seed 7 --out " + Path("a")), 0);
  ASSERT_EQ(Drp("synth --seed 7 --out " + Path("b")), 0);
  for (const char *name : {"expression.csv", "gdsc.csv", "drugs.csv", "cgc.txt", "manifest.json"}) {
    EXPECT_EQ(Read(dir_ / "a" / name), Read(dir_ / "b" / name)) << name;
  }
  const std::string manifest = Read(dir_ / "a" / "manifest.json");
  EXPECT_NE(manifest.find("\"config_hash\""), std::string::npos);
  EXPECT_NE(manifest.find("\"seed\": 7"), std::string::npos);
  EXPECT_NE(manifest.find(drp::Sha256File(dir_ / "a" / "gdsc.csv")), std::string::npos);
  ASSERT_EQ(Drp("synth --seed 8 --out " + Path("c")), 0);
  EXPECT_NE(Read(dir_ / "a" / "gdsc.csv"), Read(dir_ / "c" / "gdsc.csv"));
}

TEST_F(CliTest, EnvironmentConfigAndFlagPrecedence) {
  std::ofstream(dir_ / "run.toml") << "seed = 3\n[synth]\ndrugs = 5\n";
  const std::string env = "DRP_CONFIG=" + Path("run.toml");
  ASSERT_EQ(Drp("synth --out " + Path("env"), env), 0);
  EXPECT_NE(Read(dir_ / "env" / "manifest.json").find("\"seed\": 3"), std::string::npos);
  EXPECT_NE(Read(dir_ / "env" / "drugs.csv").find("DRUG05"), std::string::npos);
  EXPECT_EQ(Read(dir_ / "env" / "drugs.csv").find("DRUG06"), std::string::npos);

  ASSERT_EQ(Drp("synth --seed 9 --set synth.drugs=6 --out " + Path("flag"), env), 0);
  const std::string manifest = Read(dir_ / "flag" / "manifest.json");
  EXPECT_NE(manifest.find("\"seed\": 9"), std::string::npos);
  EXPECT_NE(Read(dir_ / "flag" / "drugs.csv").find("DRUG06"), std::string::npos);
}

TEST_F(CliTest, IngestLeavesInputsUntouched) {
  ASSERT_EQ(Drp("synth --seed 1 --out " + Path("s")), 0);
  const fs::path expr = dir_ / "s" / "expression.csv";
  const fs::path gdsc = dir_ / "s" / "gdsc.csv";
  const std::string before = drp::Sha256File(expr) + drp::Sha256File(gdsc);
  ASSERT_EQ(Drp("ingest --expression " + expr.string() + " --cgc " + Path("s/cgc.txt") +
                " --gdsc " + gdsc.string() + " --drugs " + Path("s/drugs.csv") + " --out " +
                Path("i")),
            0);
  EXPECT_EQ(drp::Sha256File(expr) + drp::Sha256File(gdsc), before);
  EXPECT_EQ(Read(dir_ / "i" / "filter_report.csv").rfind("gene,status\n", 0), 0u);
  EXPECT_EQ(Read(dir_ / "i" / "dataset.csv").rfind("cell_line,drug_id,smiles,ln_ic50,split\n", 0),
            0u);
}

TEST_F(CliTest, DivergenceExitsThree) {
  ASSERT_EQ(Drp("synth --seed 1 --out " + Path("s")), 0);
  EXPECT_EQ(Drp("train-genevae --expression " + Path("s/expression.csv") + " --cgc " +
                Path("s/cgc.txt") +
                " --set genevae.epochs=2 --set genevae.learning_rate=1e30 --out " + Path("d")),
            3);
}

}  // namespace
