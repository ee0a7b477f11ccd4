//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_CHEM_JUNCTION_TREE_H_
#define DRP_CHEM_JUNCTION_TREE_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "drp/chem/molecule.h"

namespace drp::chem {

enum class ClusterKind { kBond, kRing, kSingleton };

struct Cluster {
  ClusterKind kind = ClusterKind::kBond;
  std::vector<int> atoms;  // ascending
  std::string label;
  int vocab_id = -1;
};

struct JunctionTree {
  std::vector<Cluster> clusters;
  std::vector<std::pair<int, int>> edges;  // first < second, ascending
  int root = 0;

  // Sorted neighbor lists over the tree edges.
  std::vector<std::vector<int>> Adjacency() const;
};

// Canonical label of the subgraph induced by atoms; hydrogen counts are not
// part of the label.
std::string ClusterLabel(const MolecularGraph &g, std::span<const int> atoms);

// Clusters are the bonds on no ring, then the rings of the minimum cycle
// basis with rings sharing three or more atoms merged, then a singleton for
// every atom that lies in three or more of those clusters. Tree edges form a
// maximum spanning tree of the intersection graph. The weight of a pair is
// its shared atom count excluding singleton atoms; a singleton is joined to
// every cluster holding its atom with weight 1. Ties go to the smaller (i, j)
// pair. Cluster order is derived from the canonical atom order, so the result
// does not depend on input atom numbering. The root is the first cluster
// holding atom 0.
JunctionTree Decompose(const MolecularGraph &g);

// Returns human-readable violations of the tree invariants (tree-ness, atom
// and bond coverage, cluster shapes); empty when the tree is valid.
std::vector<std::string> ValidateJunctionTree(const MolecularGraph &g, const JunctionTree &t);

// Degree of every cluster in the tree, sorted; used to compare trees of
// relabeled molecules.
std::vector<int> TreeDegreeSequence(const JunctionTree &t);

}  // namespace drp::chem

#endif  // DRP_CHEM_JUNCTION_TREE_H_
