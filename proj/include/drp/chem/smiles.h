//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_CHEM_SMILES_H_
#define DRP_CHEM_SMILES_H_

#include <span>
#include <string>
#include <string_view>

#include "drp/chem/molecule.h"

namespace drp::chem {

// Parses the supported SMILES subset: organic-subset and bracket atoms
// (charge, H count), bonds - = # :, branches, ring closures (digits and
// %nn), lowercase aromatic atoms. Stereo marks (/ \ @) are accepted and
// ignored. Throws drp::ParseError with the byte offset of the problem;
// isotopes, wildcards and '.' fragments are rejected.
//
// Aromaticity is taken from the letter case. An implicit bond between two
// aromatic atoms is aromatic unless it lies on no ring, in which case it is
// single (as in biphenyl written "c1ccccc1c1ccccc1").
MolecularGraph ParseSmiles(std::string_view smiles);

struct WriteOptions {
  // When false, hydrogen counts are left out and only element, charge and
  // aromaticity are written (used for cluster labels).
  bool hydrogens = true;
};

// Writes g by depth-first traversal. Traversal starts at the lowest-ranked
// atom and visits neighbors in ascending rank; an empty rank span means atom
// index order. Disconnected graphs are joined with '.'.
std::string WriteSmiles(const MolecularGraph &g, std::span<const int> rank = {},
                        WriteOptions options = {});

}  // namespace drp::chem

#endif  // DRP_CHEM_SMILES_H_
