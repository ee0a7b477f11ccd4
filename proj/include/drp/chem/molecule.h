//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_CHEM_MOLECULE_H_
#define DRP_CHEM_MOLECULE_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace drp::chem {

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

struct Atom {
  std::string element;  // capitalized symbol, e.g. "C", "Cl"
  int atomic_number = 0;
  int charge = 0;
  bool aromatic = false;
  int hydrogens = 0;  // total attached hydrogens (implicit or bracket count)
};

struct Bond {
  int u = 0;  // u < v
  int v = 0;
  BondOrder order = BondOrder::kSingle;
};

struct Neighbor {
  int atom;
  int bond;
};

// Heavy-atom graph with sorted adjacency lists.
class MolecularGraph {
 public:
  int AddAtom(Atom atom);
  // Rejects self-loops and parallel bonds (std::invalid_argument).
  int AddBond(int a, int b, BondOrder order);

  std::size_t num_atoms() const { return atoms_.size(); }
  std::size_t num_bonds() const { return bonds_.size(); }
  const std::vector<Atom> &atoms() const { return atoms_; }
  const std::vector<Bond> &bonds() const { return bonds_; }
  const Atom &atom(int i) const { return atoms_[i]; }
  Atom &mutable_atom(int i) { return atoms_[i]; }
  const Bond &bond(int i) const { return bonds_[i]; }
  void set_bond_order(int i, BondOrder order) { bonds_[i].order = order; }

  // Neighbors in ascending atom index.
  const std::vector<Neighbor> &neighbors(int i) const { return adjacency_[i]; }
  int degree(int i) const { return static_cast<int>(adjacency_[i].size()); }
  int FindBond(int a, int b) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

// Atomic number for a capitalized element symbol, 0 if unknown.
int AtomicNumber(std::string_view symbol);
bool IsOrganicSubset(std::string_view symbol);

// Feature layout of a_u: one-hot element over {B,C,N,O,P,S,F,Cl,Br,I,other}
// (11), one-hot formal charge clipped to [-2, 2] (5), aromatic flag (1),
// one-hot degree clipped to 5 (6).
inline constexpr int kAtomFeatureWidth = 23;
// One-hot bond order {single, double, triple, aromatic}.
inline constexpr int kBondFeatureWidth = 4;

void AtomFeatures(const MolecularGraph &g, int atom, std::span<double> out);
void BondFeatures(BondOrder order, std::span<double> out);

// Hydrogens an unbracketed organic-subset atom carries under standard valence
// rules; aromatic atoms count one extra valence unit.
int DefaultImplicitHydrogens(const MolecularGraph &g, int atom);

// Bonds whose removal disconnects the graph (not on any cycle).
std::vector<bool> BridgeBonds(const MolecularGraph &g);

int ConnectedComponents(const MolecularGraph &g);
// Number of independent cycles: bonds - atoms + components.
int CyclomaticNumber(const MolecularGraph &g);

// Subgraph on the given atoms (in the given order) with every bond between
// them.
MolecularGraph InducedSubgraph(const MolecularGraph &g, std::span<const int> atoms);

// Relabels atom i of g as perm[i].
MolecularGraph Permute(const MolecularGraph &g, std::span<const int> perm);

// Sorted (min element, max element, order) triples; equal for isomorphic
// graphs and useful as a cheap structural fingerprint.
std::vector<std::string> BondMultiset(const MolecularGraph &g);

}  // namespace drp::chem

#endif  // DRP_CHEM_MOLECULE_H_
