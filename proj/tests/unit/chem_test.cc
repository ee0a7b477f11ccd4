//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "drp/chem/canonical.h"
#include "drp/chem/junction_tree.h"
#include "drp/chem/molecule.h"
#include "drp/chem/rings.h"
#include "drp/chem/smiles.h"
#include "drp/chem/vocabulary.h"
#include "drp/common/error.h"
#include "drp/common/rng.h"

namespace drp::chem {
namespace {

int CountOrder(const MolecularGraph &g, BondOrder order) {
  return static_cast<int>(std::count_if(g.bonds().begin(), g.bonds().end(),
                                        [&](const Bond &b) { return b.order == order; }));
}

std::vector<std::string> SortedLabels(const JunctionTree &t) {
  std::vector<std::string> labels;
  for (const Cluster &c : t.clusters) labels.push_back(c.label);
  std::sort(labels.begin(), labels.end());
  return labels;
}

TEST(ParseSmilesTest, Ethane) {
  MolecularGraph g = ParseSmiles("CC");
  EXPECT_EQ(g.num_atoms(), 2u);
  ASSERT_EQ(g.num_bonds(), 1u);
  EXPECT_EQ(g.bond(0).order, BondOrder::kSingle);
  EXPECT_EQ(g.atom(0).hydrogens, 3);
}

TEST(ParseSmilesTest, AceticAcid) {
  MolecularGraph g = ParseSmiles("CC(=O)O");
  EXPECT_EQ(g.num_atoms(), 4u);
  EXPECT_EQ(CountOrder(g, BondOrder::kDouble), 1);
  const int carbonyl = g.FindBond(1, 2);
  const int hydroxyl = g.FindBond(1, 3);
  ASSERT_GE(carbonyl, 0);
  ASSERT_GE(hydroxyl, 0);
  EXPECT_EQ(g.bond(carbonyl).order, BondOrder::kDouble);
  EXPECT_EQ(g.bond(hydroxyl).order, BondOrder::kSingle);
  EXPECT_EQ(g.atom(3).hydrogens, 1);
  EXPECT_EQ(g.atom(2).hydrogens, 0);
}

TEST(ParseSmilesTest, Benzene) {
  MolecularGraph g = ParseSmiles("c1ccccc1");
  EXPECT_EQ(g.num_atoms(), 6u);
  EXPECT_EQ(CountOrder(g, BondOrder::kAromatic), 6);
  for (const Atom &a : g.atoms()) {
    EXPECT_TRUE(a.aromatic);
    EXPECT_EQ(a.hydrogens, 1);
  }
  const auto rings = MinimumCycleBasis(g);
  ASSERT_EQ(rings.size(), 1u);
  EXPECT_EQ(rings[0].atoms.size(), 6u);
}

TEST(ParseSmilesTest, BracketAtoms) {
  MolecularGraph g = ParseSmiles("C[N+](C)(C)C");
  EXPECT_EQ(g.atom(1).charge, 1);
  MolecularGraph pyrrole = ParseSmiles("c1cc[nH]c1");
  EXPECT_EQ(pyrrole.atom(3).element, "N");
  EXPECT_EQ(pyrrole.atom(3).hydrogens, 1);
  MolecularGraph anion = ParseSmiles("CC(=O)[O-]");
  EXPECT_EQ(anion.atom(3).charge, -1);
  EXPECT_EQ(anion.atom(3).hydrogens, 0);
  EXPECT_EQ(ParseSmiles("[Fe+++]").atom(0).charge, 3);
  EXPECT_EQ(ParseSmiles("[Pt+2]").atom(0).charge, 2);
  EXPECT_EQ(ParseSmiles("[NH4+]").atom(0).hydrogens, 4);
}

TEST(ParseSmilesTest, StereoIsIgnored) {
  MolecularGraph a = ParseSmiles("F/C=C/F");
  MolecularGraph b = ParseSmiles("FC=CF");
  EXPECT_EQ(BondMultiset(a), BondMultiset(b));
  MolecularGraph c = ParseSmiles("N[C@@H](C)C(=O)O");
  EXPECT_EQ(c.atom(1).hydrogens, 1);
  EXPECT_EQ(c.num_atoms(), 6u);
}

TEST(ParseSmilesTest, RingClosureForms) {
  EXPECT_EQ(ParseSmiles("C%12CC%12").num_bonds(), 3u);
  EXPECT_EQ(ParseSmiles("C1CC=1").bond(ParseSmiles("C1CC=1").FindBond(0, 2)).order,
            BondOrder::kDouble);
  MolecularGraph g = ParseSmiles("C=1CC1");
  EXPECT_EQ(g.bond(g.FindBond(0, 2)).order, BondOrder::kDouble);
}

TEST(ParseSmilesTest, AromaticBridgeBecomesSingle) {
  MolecularGraph g = ParseSmiles("c1ccccc1c1ccccc1");
  const int link = g.FindBond(5, 6);
  ASSERT_GE(link, 0);
  EXPECT_EQ(g.bond(link).order, BondOrder::kSingle);
  EXPECT_EQ(CountOrder(g, BondOrder::kAromatic), 12);
}

struct BadSmiles {
  const char *text;
  std::size_t offset;
};

class ParseErrorTest : public ::testing::TestWithParam<BadSmiles> {};

TEST_P(ParseErrorTest, ReportsOffset) {
  try {
    ParseSmiles(GetParam().text);
    FAIL() << "parsed " << GetParam().text;
  } catch (const ParseError &e) {
    EXPECT_EQ(e.offset(), GetParam().offset) << e.what();
  }
}

INSTANTIATE_TEST_SUITE_P(
    Malformed, ParseErrorTest,
    ::testing::Values(BadSmiles{"", 0}, BadSmiles{"CC(C", 2}, BadSmiles{"CC)C", 2},
                      BadSmiles{"C1CC", 1}, BadSmiles{"CXC", 1}, BadSmiles{"CC.O", 2},
                      BadSmiles{"C[13C]", 2}, BadSmiles{"C[C", 1}, BadSmiles{"C=", 1},
                      BadSmiles{"(C)", 0}, BadSmiles{"C()C", 1}, BadSmiles{"C11", 2},
                      BadSmiles{"CC:C", 2}, BadSmiles{"C==C", 2}, BadSmiles{"C*", 1},
                      BadSmiles{"[Zz]", 1}));

TEST(WriteSmilesTest, RoundTripSimple) {
  for (const char *s : {"CC", "c1ccccc1", "CC(=O)O", "C1CC2CCC1C2", "c1ccc2ccccc2c1",
                        "c1ccccc1-c1ccccc1", "C[N+](C)(C)C", "c1cc[nH]c1", "C#N", "[Na+]",
                        "O=S(=O)(O)O", "c1ccccc1:c1ccccc1"}) {
    MolecularGraph g = ParseSmiles(s);
    const std::string out = WriteSmiles(g);
    MolecularGraph back = ParseSmiles(out);
    EXPECT_EQ(back.num_atoms(), g.num_atoms()) << s << " -> " << out;
    EXPECT_EQ(BondMultiset(back), BondMultiset(g)) << s << " -> " << out;
    EXPECT_EQ(CanonicalSmiles(back), CanonicalSmiles(g)) << s << " -> " << out;
  }
}

TEST(WriteSmilesTest, BiphenylLinkWrittenExplicitly) {
  EXPECT_EQ(WriteSmiles(ParseSmiles("c1ccccc1c1ccccc1")), "c1ccccc1-c1ccccc1");
}

TEST(CanonicalTest, InvariantUnderAtomOrder) {
  Rng rng(99);
  for (const char *s : {"CC(=O)Oc1ccccc1C(=O)O", "c1ccc2c(c1)cccc2", "CN1CCC[C@H]1c1cccnc1",
                        "C1CC2CCC1C2", "OC(=O)C1=CC=CC=C1"}) {
    MolecularGraph g = ParseSmiles(s);
    const std::string reference = CanonicalSmiles(g);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<int> perm(g.num_atoms());
      std::iota(perm.begin(), perm.end(), 0);
      rng.Shuffle(perm.begin(), perm.end());
      EXPECT_EQ(CanonicalSmiles(Permute(g, perm)), reference) << s;
    }
  }
}

TEST(CanonicalTest, DistinguishesIsomers) {
  EXPECT_NE(CanonicalSmiles(ParseSmiles("CCCO")), CanonicalSmiles(ParseSmiles("CC(C)O")));
  EXPECT_EQ(CanonicalSmiles(ParseSmiles("OCCC")), CanonicalSmiles(ParseSmiles("CCCO")));
}

TEST(RingsTest, FusedAndBridgedCounts) {
  EXPECT_EQ(MinimumCycleBasis(ParseSmiles("c1ccc2ccccc2c1")).size(), 2u);
  const auto norbornane = MinimumCycleBasis(ParseSmiles("C1CC2CCC1C2"));
  ASSERT_EQ(norbornane.size(), 2u);
  EXPECT_EQ(norbornane[0].atoms.size(), 5u);
  EXPECT_EQ(norbornane[1].atoms.size(), 5u);
  const auto cubane = MinimumCycleBasis(ParseSmiles("C12C3C4C1C5C2C3C45"));
  ASSERT_EQ(cubane.size(), 5u);
  for (const Ring &r : cubane) EXPECT_EQ(r.atoms.size(), 4u);
  EXPECT_TRUE(MinimumCycleBasis(ParseSmiles("CCCC")).empty());
}

TEST(DecomposeTest, Ethane) {
  JunctionTree t = Decompose(ParseSmiles("CC"));
  ASSERT_EQ(t.clusters.size(), 1u);
  EXPECT_EQ(t.clusters[0].kind, ClusterKind::kBond);
  EXPECT_TRUE(t.edges.empty());
}

TEST(DecomposeTest, Toluene) {
  MolecularGraph g = ParseSmiles("Cc1ccccc1");
  JunctionTree t = Decompose(g);
  ASSERT_EQ(t.clusters.size(), 2u);
  ASSERT_EQ(t.edges.size(), 1u);
  EXPECT_EQ(t.clusters[0].kind, ClusterKind::kBond);
  EXPECT_EQ(t.clusters[1].kind, ClusterKind::kRing);
  EXPECT_EQ(t.clusters[1].atoms.size(), 6u);
  EXPECT_EQ(t.root, 0);
  EXPECT_TRUE(ValidateJunctionTree(g, t).empty());
}

TEST(DecomposeTest, Biphenyl) {
  MolecularGraph g = ParseSmiles("c1ccccc1-c1ccccc1");
  JunctionTree t = Decompose(g);
  ASSERT_EQ(t.clusters.size(), 3u);
  EXPECT_EQ(t.edges.size(), 2u);
  EXPECT_EQ(TreeDegreeSequence(t), (std::vector<int>{1, 1, 2}));
  EXPECT_TRUE(ValidateJunctionTree(g, t).empty());
}

TEST(DecomposeTest, SingleAtom) {
  MolecularGraph g = ParseSmiles("[Na+]");
  JunctionTree t = Decompose(g);
  ASSERT_EQ(t.clusters.size(), 1u);
  EXPECT_EQ(t.clusters[0].kind, ClusterKind::kSingleton);
  EXPECT_TRUE(ValidateJunctionTree(g, t).empty());
}

TEST(DecomposeTest, BranchAtomBecomesSingleton) {
  MolecularGraph g = ParseSmiles("CC(C)C");
  JunctionTree t = Decompose(g);
  ASSERT_EQ(t.clusters.size(), 4u);
  EXPECT_EQ(t.clusters[3].kind, ClusterKind::kSingleton);
  EXPECT_EQ(TreeDegreeSequence(t), (std::vector<int>{1, 1, 1, 3}));
  EXPECT_TRUE(ValidateJunctionTree(g, t).empty());
}

TEST(DecomposeTest, BridgedRingsMerge) {
  MolecularGraph g = ParseSmiles("C1CC2CCC1C2");
  JunctionTree t = Decompose(g);
  ASSERT_EQ(t.clusters.size(), 1u);
  EXPECT_EQ(t.clusters[0].atoms.size(), 7u);
  EXPECT_TRUE(ValidateJunctionTree(g, t).empty());
}

TEST(DecomposeTest, FusedRingsShareTwoAtoms) {
  MolecularGraph g = ParseSmiles("c1ccc2ccccc2c1");
  JunctionTree t = Decompose(g);
  ASSERT_EQ(t.clusters.size(), 2u);
  EXPECT_EQ(t.edges.size(), 1u);
  EXPECT_TRUE(ValidateJunctionTree(g, t).empty());
}

TEST(DecomposeTest, InvariantUnderRelabeling) {
  Rng rng(5);
  for (const char *s : {"CC(C)Cc1ccc(cc1)C(C)C(=O)O", "CN1C=NC2=C1C(=O)N(C(=O)N2C)C",
                        "c1ccc2c(c1)ccc1ccccc12", "CC(C)(C)c1ccc(O)cc1", "C1CC2(CC1)CCCC2"}) {
    MolecularGraph g = ParseSmiles(s);
    JunctionTree reference = Decompose(g);
    ASSERT_TRUE(ValidateJunctionTree(g, reference).empty()) << s;
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<int> perm(g.num_atoms());
      std::iota(perm.begin(), perm.end(), 0);
      rng.Shuffle(perm.begin(), perm.end());
      MolecularGraph h = Permute(g, perm);
      JunctionTree t = Decompose(h);
      EXPECT_TRUE(ValidateJunctionTree(h, t).empty()) << s;
      EXPECT_EQ(SortedLabels(t), SortedLabels(reference)) << s;
      EXPECT_EQ(TreeDegreeSequence(t), TreeDegreeSequence(reference)) << s;
    }
  }
}

TEST(VocabularyTest, CorpusExamples) {
  EXPECT_EQ(ClusterVocabulary::Build(std::vector<std::string>{"CC"}).size(), 1u);
  EXPECT_EQ(ClusterVocabulary::Build(std::vector<std::string>{"CC", "CCC"}).size(), 1u);
  ClusterVocabulary toluene = ClusterVocabulary::Build(std::vector<std::string>{"Cc1ccccc1"});
  EXPECT_EQ(toluene.size(), 2u);
  EXPECT_TRUE(std::is_sorted(toluene.labels().begin(), toluene.labels().end()));
}

TEST(VocabularyTest, ParseFailureNamesLine) {
  try {
    ClusterVocabulary::Build(std::vector<std::string>{"CC", "C1CC"});
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(VocabularyTest, UnseenLabelIsReported) {
  ClusterVocabulary vocab = ClusterVocabulary::Build(std::vector<std::string>{"CC"});
  JunctionTree t = Decompose(ParseSmiles("CO"));
  try {
    AssignVocabulary(t, vocab);
    FAIL();
  } catch (const VocabularyError &e) {
    EXPECT_EQ(e.label(), t.clusters[0].label);
  }
  JunctionTree ok = Decompose(ParseSmiles("CCC"));
  AssignVocabulary(ok, vocab);
  EXPECT_EQ(ok.clusters[0].vocab_id, 0);
}

TEST(VocabularyTest, EmbeddingsAreSeededAndBounded) {
  ClusterVocabulary vocab = ClusterVocabulary::Build(std::vector<std::string>{"Cc1ccccc1", "CO"});
  Eigen::MatrixXd a = vocab.InitialEmbeddings(1), b = vocab.InitialEmbeddings(1);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.cols(), kEmbeddingWidth);
  EXPECT_LE(a.cwiseAbs().maxCoeff(), 0.1);
  EXPECT_NE(vocab.Hash(), ClusterVocabulary::Build(std::vector<std::string>{"CC"}).Hash());
}

TEST(FeaturesTest, Widths) {
  MolecularGraph g = ParseSmiles("C[N+](C)(C)C");
  std::vector<double> f(kAtomFeatureWidth);
  AtomFeatures(g, 1, f);
  EXPECT_EQ(std::accumulate(f.begin(), f.end(), 0.0), 3.0);  // element, charge, degree
  EXPECT_EQ(f[2], 1.0);       // N
  EXPECT_EQ(f[11 + 3], 1.0);  // charge +1
  EXPECT_EQ(f[17 + 4], 1.0);  // degree 4
  std::vector<double> b(kBondFeatureWidth);
  BondFeatures(BondOrder::kAromatic, b);
  EXPECT_EQ(b, (std::vector<double>{0, 0, 0, 1}));
}

}  // namespace
}  // namespace drp::chem
