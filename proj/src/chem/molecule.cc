//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/chem/molecule.h"

#include <algorithm>
#include <array>
#include <functional>
#include <stdexcept>

namespace drp::chem {
namespace {

constexpr std::array<std::string_view, 92> kElements = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg",
    "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr",
    "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
    "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
    "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf",
    "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po",
    "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U"};

constexpr std::array<std::string_view, 10> kFeatureElements = {
    "B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"};

int BondValence(BondOrder order) {
  switch (order) {
    case BondOrder::kSingle: return 1;
    case BondOrder::kDouble: return 2;
    case BondOrder::kTriple: return 3;
    case BondOrder::kAromatic: return 1;
  }
  return 1;
}

std::vector<int> DefaultValences(std::string_view element) {
  if (element == "B") return {3};
  if (element == "C") return {4};
  if (element == "N" || element == "P") return {3, 5};
  if (element == "O") return {2};
  if (element == "S") return {2, 4, 6};
  if (element == "F" || element == "Cl" || element == "Br" || element == "I") return {1};
  return {};
}

}  // namespace

int MolecularGraph::AddAtom(Atom atom) {
  atoms_.push_back(std::move(atom));
  adjacency_.emplace_back();
  return static_cast<int>(atoms_.size()) - 1;
}

int MolecularGraph::AddBond(int a, int b, BondOrder order) {
  const int n = static_cast<int>(atoms_.size());
  if (a < 0 || b < 0 || a >= n || b >= n) throw std::invalid_argument("bond atom out of range");
  if (a == b) throw std::invalid_argument("self-loop bond");
  if (FindBond(a, b) >= 0) throw std::invalid_argument("duplicate bond");
  const int id = static_cast<int>(bonds_.size());
  bonds_.push_back(Bond{std::min(a, b), std::max(a, b), order});
  auto insert = [](std::vector<Neighbor> &adj, Neighbor nb) {
    auto it = std::lower_bound(adj.begin(), adj.end(), nb,
                               [](const Neighbor &x, const Neighbor &y) { return x.atom < y.atom; });
    adj.insert(it, nb);
  };
  insert(adjacency_[a], Neighbor{b, id});
  insert(adjacency_[b], Neighbor{a, id});
  return id;
}

int MolecularGraph::FindBond(int a, int b) const {
  if (a < 0 || a >= static_cast<int>(adjacency_.size())) return -1;
  for (const auto &nb : adjacency_[a]) {
    if (nb.atom == b) return nb.bond;
  }
  return -1;
}

int AtomicNumber(std::string_view symbol) {
  for (std::size_t i = 0; i < kElements.size(); ++i) {
    if (kElements[i] == symbol) return static_cast<int>(i) + 1;
  }
  return 0;
}

bool IsOrganicSubset(std::string_view symbol) {
  return std::find(kFeatureElements.begin(), kFeatureElements.end(), symbol) !=
         kFeatureElements.end();
}

void AtomFeatures(const MolecularGraph &g, int atom, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const Atom &a = g.atom(atom);
  std::size_t slot = kFeatureElements.size();
  for (std::size_t i = 0; i < kFeatureElements.size(); ++i) {
    if (kFeatureElements[i] == a.element) slot = i;
  }
  out[slot] = 1.0;
  out[11 + std::clamp(a.charge, -2, 2) + 2] = 1.0;
  out[16] = a.aromatic ? 1.0 : 0.0;
  out[17 + std::min(g.degree(atom), 5)] = 1.0;
}

void BondFeatures(BondOrder order, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  out[static_cast<int>(order) - 1] = 1.0;
}

int DefaultImplicitHydrogens(const MolecularGraph &g, int atom) {
  const Atom &a = g.atom(atom);
  int used = 0;
  for (const auto &nb : g.neighbors(atom)) used += BondValence(g.bond(nb.bond).order);
  if (a.aromatic) used += 1;
  for (int v : DefaultValences(a.element)) {
    if (used <= v) return v - used;
  }
  return 0;
}

std::vector<bool> BridgeBonds(const MolecularGraph &g) {
  const int n = static_cast<int>(g.num_atoms());
  std::vector<bool> bridge(g.num_bonds(), false);
  std::vector<int> disc(n, -1), low(n, 0);
  int timer = 0;
  std::function<void(int, int)> dfs = [&](int u, int parent_bond) {
    disc[u] = low[u] = timer++;
    for (const auto &nb : g.neighbors(u)) {
      if (nb.bond == parent_bond) continue;
      if (disc[nb.atom] < 0) {
        dfs(nb.atom, nb.bond);
        low[u] = std::min(low[u], low[nb.atom]);
        if (low[nb.atom] > disc[u]) bridge[nb.bond] = true;
      } else {
        low[u] = std::min(low[u], disc[nb.atom]);
      }
    }
  };
  for (int i = 0; i < n; ++i) {
    if (disc[i] < 0) dfs(i, -1);
  }
  return bridge;
}

int ConnectedComponents(const MolecularGraph &g) {
  const int n = static_cast<int>(g.num_atoms());
  std::vector<bool> seen(n, false);
  int components = 0;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++components;
    seen[s] = true;
    stack.push_back(s);
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (const auto &nb : g.neighbors(u)) {
        if (!seen[nb.atom]) {
          seen[nb.atom] = true;
          stack.push_back(nb.atom);
        }
      }
    }
  }
  return components;
}

int CyclomaticNumber(const MolecularGraph &g) {
  return static_cast<int>(g.num_bonds()) - static_cast<int>(g.num_atoms()) +
         ConnectedComponents(g);
}

MolecularGraph InducedSubgraph(const MolecularGraph &g, std::span<const int> atoms) {
  MolecularGraph sub;
  std::vector<int> local(g.num_atoms(), -1);
  for (int a : atoms) local[a] = sub.AddAtom(g.atom(a));
  for (const Bond &b : g.bonds()) {
    if (local[b.u] >= 0 && local[b.v] >= 0) sub.AddBond(local[b.u], local[b.v], b.order);
  }
  return sub;
}

MolecularGraph Permute(const MolecularGraph &g, std::span<const int> perm) {
  const std::size_t n = g.num_atoms();
  std::vector<int> inverse(n);
  for (std::size_t i = 0; i < n; ++i) inverse[perm[i]] = static_cast<int>(i);
  MolecularGraph out;
  for (std::size_t j = 0; j < n; ++j) out.AddAtom(g.atom(inverse[j]));
  // Bonds are added in an order that also depends on the permutation.
  std::vector<std::pair<std::pair<int, int>, BondOrder>> bonds;
  for (const Bond &b : g.bonds()) {
    int u = perm[b.u], v = perm[b.v];
    bonds.push_back({{std::min(u, v), std::max(u, v)}, b.order});
  }
  std::sort(bonds.begin(), bonds.end(),
            [](const auto &x, const auto &y) { return x.first < y.first; });
  for (const auto &[uv, order] : bonds) out.AddBond(uv.first, uv.second, order);
  return out;
}

std::vector<std::string> BondMultiset(const MolecularGraph &g) {
  std::vector<std::string> out;
  for (const Bond &b : g.bonds()) {
    auto key = [&](int i) {
      const Atom &a = g.atom(i);
      return (a.aromatic ? std::string("ar:") : std::string()) + a.element;
    };
    std::string x = key(b.u), y = key(b.v);
    if (y < x) std::swap(x, y);
    out.push_back(x + "|" + y + "|" + std::to_string(static_cast<int>(b.order)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace drp::chem
