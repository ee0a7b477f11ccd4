//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/chem/canonical.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <tuple>

namespace drp::chem {
namespace {

template <typename Key>
std::vector<int> DenseRanks(const std::vector<Key> &keys) {
  std::vector<Key> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> ranks(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    ranks[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), keys[i]) -
                                sorted.begin());
  }
  return ranks;
}

int CountClasses(const std::vector<int> &ranks) {
  if (ranks.empty()) return 0;
  return *std::max_element(ranks.begin(), ranks.end()) + 1;
}

struct Best {
  std::optional<std::string> smiles;
  std::vector<int> ranks;
};

void Search(const MolecularGraph &g, std::vector<int> ranks, WriteOptions options, Best &best,
            int &leaves) {
  ranks = RefineRanks(g, std::move(ranks));
  const int n = static_cast<int>(ranks.size());
  if (CountClasses(ranks) == n) {
    std::string s = WriteSmiles(g, ranks, options);
    if (!best.smiles || s < *best.smiles) {
      best.smiles = std::move(s);
      best.ranks = ranks;
    }
    ++leaves;
    return;
  }
  // First class with more than one member.
  std::vector<int> counts(n, 0);
  for (int r : ranks) ++counts[r];
  int tied = 0;
  while (counts[tied] < 2) ++tied;
  for (int member = 0; member < n; ++member) {
    if (ranks[member] != tied) continue;
    if (leaves >= kMaxCanonicalLeaves) return;
    std::vector<int> keys(n);
    for (int i = 0; i < n; ++i) {
      keys[i] = 2 * ranks[i] + ((ranks[i] == tied && i != member) ? 1 : 0);
    }
    Search(g, DenseRanks(keys), options, best, leaves);
  }
}

}  // namespace

std::vector<int> RefineRanks(const MolecularGraph &g, std::vector<int> classes) {
  const int n = static_cast<int>(g.num_atoms());
  std::vector<int> ranks = DenseRanks(classes);
  int count = CountClasses(ranks);
  while (true) {
    std::vector<std::pair<int, std::vector<int>>> keys(n);
    for (int i = 0; i < n; ++i) {
      std::vector<int> around;
      for (const Neighbor &nb : g.neighbors(i)) {
        around.push_back(ranks[nb.atom] * 8 + static_cast<int>(g.bond(nb.bond).order));
      }
      std::sort(around.begin(), around.end());
      keys[i] = {ranks[i], std::move(around)};
    }
    std::vector<int> next = DenseRanks(keys);
    const int next_count = CountClasses(next);
    ranks = std::move(next);
    if (next_count == count) break;
    count = next_count;
  }
  return ranks;
}

std::vector<int> InvariantRanks(const MolecularGraph &g, WriteOptions options) {
  const int n = static_cast<int>(g.num_atoms());
  std::vector<std::tuple<int, int, int, int, int>> keys(n);
  for (int i = 0; i < n; ++i) {
    const Atom &a = g.atom(i);
    keys[i] = {a.atomic_number, g.degree(i), a.aromatic ? 1 : 0, a.charge,
               options.hydrogens ? a.hydrogens : 0};
  }
  return DenseRanks(keys);
}

std::string CanonicalSmiles(const MolecularGraph &g, WriteOptions options) {
  if (g.num_atoms() == 0) return "";
  Best best;
  int leaves = 0;
  Search(g, InvariantRanks(g, options), options, best, leaves);
  return *best.smiles;
}

std::vector<int> CanonicalRanks(const MolecularGraph &g, WriteOptions options) {
  if (g.num_atoms() == 0) return {};
  Best best;
  int leaves = 0;
  Search(g, InvariantRanks(g, options), options, best, leaves);
  return best.ranks;
}

}  // namespace drp::chem
