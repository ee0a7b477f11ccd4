//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_CHEM_RINGS_H_
#define DRP_CHEM_RINGS_H_

#include <vector>

#include "drp/chem/molecule.h"

namespace drp::chem {

struct Ring {
  std::vector<int> atoms;  // ascending
  std::vector<int> bonds;  // ascending
};

// Minimum cycle basis: Horton candidate cycles (shortest paths from every
// vertex closed by every bond) sorted by length, then bond-set order,
// accepted greedily while linearly independent over GF(2). Returns exactly
// CyclomaticNumber(g) rings.
std::vector<Ring> MinimumCycleBasis(const MolecularGraph &g);

}  // namespace drp::chem

#endif  // DRP_CHEM_RINGS_H_
