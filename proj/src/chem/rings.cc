//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/chem/rings.h"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <set>

namespace drp::chem {
namespace {

using BitRow = std::vector<std::uint64_t>;

int LowestBit(const BitRow &row) {
  for (std::size_t w = 0; w < row.size(); ++w) {
    if (row[w] != 0) return static_cast<int>(w * 64 + std::countr_zero(row[w]));
  }
  return -1;
}

bool TestBit(const BitRow &row, int bit) { return (row[bit / 64] >> (bit % 64)) & 1U; }

struct ShortestPaths {
  std::vector<int> dist;
  std::vector<int> parent_bond;
  std::vector<int> parent;
};

ShortestPaths Bfs(const MolecularGraph &g, int source) {
  const int n = static_cast<int>(g.num_atoms());
  ShortestPaths sp{std::vector<int>(n, -1), std::vector<int>(n, -1), std::vector<int>(n, -1)};
  std::deque<int> queue{source};
  sp.dist[source] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (const Neighbor &nb : g.neighbors(u)) {
      if (sp.dist[nb.atom] >= 0) continue;
      sp.dist[nb.atom] = sp.dist[u] + 1;
      sp.parent[nb.atom] = u;
      sp.parent_bond[nb.atom] = nb.bond;
      queue.push_back(nb.atom);
    }
  }
  return sp;
}

}  // namespace

std::vector<Ring> MinimumCycleBasis(const MolecularGraph &g) {
  const int nu = CyclomaticNumber(g);
  if (nu <= 0) return {};
  const int n = static_cast<int>(g.num_atoms());
  const int m = static_cast<int>(g.num_bonds());
  const std::size_t words = (m + 63) / 64;

  struct Candidate {
    int length;
    BitRow bits;
    bool operator<(const Candidate &o) const {
      if (length != o.length) return length < o.length;
      return bits < o.bits;
    }
  };
  std::set<Candidate> candidates;
  for (int v = 0; v < n; ++v) {
    const ShortestPaths sp = Bfs(g, v);
    for (int b = 0; b < m; ++b) {
      const Bond &bond = g.bond(b);
      const int x = bond.u, y = bond.v;
      if (sp.dist[x] < 0 || sp.dist[y] < 0) continue;
      if (sp.parent_bond[x] == b || sp.parent_bond[y] == b) continue;
      std::vector<int> px, py;
      for (int a = x; a >= 0; a = sp.parent[a]) px.push_back(a);
      for (int a = y; a >= 0; a = sp.parent[a]) py.push_back(a);
      // Paths must meet only at v.
      std::vector<int> sx(px.begin(), px.end() - 1), sy(py.begin(), py.end() - 1);
      std::sort(sx.begin(), sx.end());
      std::sort(sy.begin(), sy.end());
      std::vector<int> common;
      std::set_intersection(sx.begin(), sx.end(), sy.begin(), sy.end(), std::back_inserter(common));
      if (!common.empty()) continue;
      BitRow bits(words, 0);
      int length = 1;
      bits[b / 64] |= std::uint64_t{1} << (b % 64);
      for (const auto *path : {&px, &py}) {
        for (std::size_t i = 0; i + 1 < path->size(); ++i) {
          const int pb = sp.parent_bond[(*path)[i]];
          bits[pb / 64] |= std::uint64_t{1} << (pb % 64);
          ++length;
        }
      }
      candidates.insert(Candidate{length, std::move(bits)});
    }
  }

  // Greedy GF(2) elimination; rows are kept sorted by pivot (lowest set bit).
  std::vector<std::pair<int, BitRow>> basis;
  std::vector<Ring> rings;
  for (const Candidate &c : candidates) {
    if (static_cast<int>(rings.size()) == nu) break;
    BitRow reduced = c.bits;
    for (const auto &[pivot, row] : basis) {
      if (TestBit(reduced, pivot)) {
        for (std::size_t w = 0; w < words; ++w) reduced[w] ^= row[w];
      }
    }
    const int pivot = LowestBit(reduced);
    if (pivot < 0) continue;
    auto at = std::lower_bound(basis.begin(), basis.end(), pivot,
                               [](const auto &entry, int p) { return entry.first < p; });
    basis.insert(at, {pivot, std::move(reduced)});
    Ring ring;
    std::set<int> atoms;
    for (int b = 0; b < m; ++b) {
      if (TestBit(c.bits, b)) {
        ring.bonds.push_back(b);
        atoms.insert(g.bond(b).u);
        atoms.insert(g.bond(b).v);
      }
    }
    ring.atoms.assign(atoms.begin(), atoms.end());
    rings.push_back(std::move(ring));
  }
  return rings;
}

}  // namespace drp::chem
