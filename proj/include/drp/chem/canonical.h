//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_CHEM_CANONICAL_H_
#define DRP_CHEM_CANONICAL_H_

#include <string>
#include <vector>

#include "drp/chem/molecule.h"
#include "drp/chem/smiles.h"

namespace drp::chem {

// Refines atom classes by repeatedly splitting on sorted neighbor
// (class, bond order) lists until the partition is stable. Returned ranks
// are dense, start at 0, and preserve the order of the input classes.
std::vector<int> RefineRanks(const MolecularGraph &g, std::vector<int> classes);

// Initial classes: atomic number, then degree, aromaticity, charge and (when
// options.hydrogens) hydrogen count.
std::vector<int> InvariantRanks(const MolecularGraph &g, WriteOptions options = {});

// Canonical SMILES: refinement followed by a tie-breaking search that keeps
// the lexicographically smallest output. The search is capped at
// kMaxCanonicalLeaves complete orderings, which is only reachable for highly
// symmetric graphs far larger than any cluster.
inline constexpr int kMaxCanonicalLeaves = 512;
std::string CanonicalSmiles(const MolecularGraph &g, WriteOptions options = {});

// The total atom order behind CanonicalSmiles: rank[i] is the position of
// atom i. Isomorphic graphs receive orders that agree up to automorphism.
std::vector<int> CanonicalRanks(const MolecularGraph &g, WriteOptions options = {});

}  // namespace drp::chem

#endif  // DRP_CHEM_CANONICAL_H_
