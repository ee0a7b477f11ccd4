//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/chem/junction_tree.h"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "drp/chem/canonical.h"
#include "drp/chem/rings.h"

namespace drp::chem {
namespace {

int SharedCount(const std::vector<int> &a, const std::vector<int> &b,
                const std::vector<bool> &excluded) {
  int count = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      if (!excluded[a[i]]) ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int Find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool Unite(int a, int b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

std::vector<std::vector<int>> JunctionTree::Adjacency() const {
  std::vector<std::vector<int>> adj(clusters.size());
  for (const auto &[a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto &list : adj) std::sort(list.begin(), list.end());
  return adj;
}

std::string ClusterLabel(const MolecularGraph &g, std::span<const int> atoms) {
  return CanonicalSmiles(InducedSubgraph(g, atoms), WriteOptions{.hydrogens = false});
}

namespace {

// Decomposition with every tie broken by atom, bond and cluster index.
JunctionTree DecomposeIndexed(const MolecularGraph &g) {
  JunctionTree tree;
  const int n = static_cast<int>(g.num_atoms());
  if (n == 0) return tree;
  if (n == 1) {
    tree.clusters.push_back(Cluster{ClusterKind::kSingleton, {0}, ClusterLabel(g, std::vector<int>{0})});
    return tree;
  }

  const std::vector<Ring> rings = MinimumCycleBasis(g);
  std::vector<bool> ring_bond(g.num_bonds(), false);
  for (const Ring &r : rings) {
    for (int b : r.bonds) ring_bond[b] = true;
  }
  std::vector<Cluster> clusters;
  for (std::size_t b = 0; b < g.num_bonds(); ++b) {
    if (ring_bond[b]) continue;
    const Bond &bond = g.bond(static_cast<int>(b));
    clusters.push_back(Cluster{ClusterKind::kBond, {bond.u, bond.v}, ""});
  }

  // Merge bridged ring systems to a fixed point.
  std::vector<std::vector<int>> ring_sets;
  for (const Ring &r : rings) ring_sets.push_back(r.atoms);
  const std::vector<bool> none(n, false);
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < ring_sets.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < ring_sets.size() && !merged; ++j) {
        if (SharedCount(ring_sets[i], ring_sets[j], none) >= 3) {
          std::vector<int> united;
          std::set_union(ring_sets[i].begin(), ring_sets[i].end(), ring_sets[j].begin(),
                         ring_sets[j].end(), std::back_inserter(united));
          ring_sets[i] = std::move(united);
          ring_sets.erase(ring_sets.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
        }
      }
    }
  }
  for (auto &atoms : ring_sets) clusters.push_back(Cluster{ClusterKind::kRing, std::move(atoms), ""});

  std::vector<std::vector<int>> member_of(n);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (int a : clusters[c].atoms) member_of[a].push_back(static_cast<int>(c));
  }
  const int base = static_cast<int>(clusters.size());
  std::vector<bool> singleton_atom(n, false);
  for (int a = 0; a < n; ++a) {
    if (member_of[a].size() >= 3) {
      singleton_atom[a] = true;
      clusters.push_back(Cluster{ClusterKind::kSingleton, {a}, ""});
    }
  }

  // Candidate edges as (-weight, i, j) so ascending order is Kruskal order.
  std::vector<std::tuple<int, int, int>> candidates;
  for (int i = 0; i < base; ++i) {
    for (int j = i + 1; j < base; ++j) {
      const int w = SharedCount(clusters[i].atoms, clusters[j].atoms, singleton_atom);
      if (w > 0) candidates.emplace_back(-w, i, j);
    }
  }
  for (int s = base; s < static_cast<int>(clusters.size()); ++s) {
    for (int c : member_of[clusters[s].atoms[0]]) candidates.emplace_back(-1, c, s);
  }
  std::sort(candidates.begin(), candidates.end());
  DisjointSet forest(static_cast<int>(clusters.size()));
  for (const auto &[neg_w, i, j] : candidates) {
    if (forest.Unite(i, j)) tree.edges.emplace_back(i, j);
  }
  std::sort(tree.edges.begin(), tree.edges.end());

  for (Cluster &c : clusters) c.label = ClusterLabel(g, c.atoms);
  tree.clusters = std::move(clusters);
  return tree;
}

}  // namespace

JunctionTree Decompose(const MolecularGraph &g) {
  // Working in canonical atom order makes every index-based tie-break (cycle
  // basis choice, cluster order, spanning-tree ties) independent of how the
  // input happened to number its atoms.
  const std::vector<int> rank = CanonicalRanks(g);
  JunctionTree tree = DecomposeIndexed(Permute(g, rank));
  std::vector<int> original(rank.size());
  for (std::size_t i = 0; i < rank.size(); ++i) original[rank[i]] = static_cast<int>(i);
  for (Cluster &c : tree.clusters) {
    for (int &a : c.atoms) a = original[a];
    std::sort(c.atoms.begin(), c.atoms.end());
  }
  for (std::size_t c = 0; c < tree.clusters.size(); ++c) {
    const auto &atoms = tree.clusters[c].atoms;
    if (std::binary_search(atoms.begin(), atoms.end(), 0)) {
      tree.root = static_cast<int>(c);
      break;
    }
  }
  return tree;
}

std::vector<std::string> ValidateJunctionTree(const MolecularGraph &g, const JunctionTree &t) {
  std::vector<std::string> problems;
  const std::size_t k = t.clusters.size();
  if (k == 0) {
    problems.push_back("no clusters");
    return problems;
  }
  if (t.edges.size() + 1 != k) {
    problems.push_back("edge count " + std::to_string(t.edges.size()) + " != clusters - 1 (" +
                       std::to_string(k - 1) + ")");
  }
  DisjointSet forest(static_cast<int>(k));
  for (const auto &[a, b] : t.edges) {
    if (a < 0 || b < 0 || a >= static_cast<int>(k) || b >= static_cast<int>(k) || a == b) {
      problems.push_back("edge endpoint out of range");
      continue;
    }
    if (!forest.Unite(a, b)) problems.push_back("cycle through edge " + std::to_string(a) + "-" + std::to_string(b));
    std::vector<int> common;
    const auto &x = t.clusters[a].atoms, &y = t.clusters[b].atoms;
    std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(common));
    if (common.empty()) problems.push_back("tree edge between disjoint clusters");
  }
  for (std::size_t c = 1; c < k; ++c) {
    if (forest.Find(static_cast<int>(c)) != forest.Find(0)) {
      problems.push_back("tree is disconnected");
      break;
    }
  }
  std::vector<bool> atom_seen(g.num_atoms(), false);
  std::set<std::pair<int, int>> covered;
  for (const Cluster &c : t.clusters) {
    for (int a : c.atoms) {
      if (a >= 0 && a < static_cast<int>(g.num_atoms())) atom_seen[a] = true;
    }
    switch (c.kind) {
      case ClusterKind::kRing:
        if (c.atoms.size() < 3) problems.push_back("ring cluster with fewer than 3 atoms");
        break;
      case ClusterKind::kBond:
        if (c.atoms.size() != 2 || g.FindBond(c.atoms[0], c.atoms[1]) < 0) {
          problems.push_back("bond cluster is not a bonded atom pair");
        }
        break;
      case ClusterKind::kSingleton:
        if (c.atoms.size() != 1) problems.push_back("singleton cluster with several atoms");
        break;
    }
    for (std::size_t i = 0; i < c.atoms.size(); ++i) {
      for (std::size_t j = i + 1; j < c.atoms.size(); ++j) covered.emplace(c.atoms[i], c.atoms[j]);
    }
  }
  if (std::find(atom_seen.begin(), atom_seen.end(), false) != atom_seen.end()) {
    problems.push_back("atom not covered by any cluster");
  }
  for (const Bond &b : g.bonds()) {
    if (!covered.contains({b.u, b.v})) {
      problems.push_back("bond " + std::to_string(b.u) + "-" + std::to_string(b.v) +
                         " not inside any cluster");
    }
  }
  return problems;
}

std::vector<int> TreeDegreeSequence(const JunctionTree &t) {
  std::vector<int> degree(t.clusters.size(), 0);
  for (const auto &[a, b] : t.edges) {
    ++degree[a];
    ++degree[b];
  }
  std::sort(degree.begin(), degree.end());
  return degree;
}

}  // namespace drp::chem
