//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_CHEM_VOCABULARY_H_
#define DRP_CHEM_VOCABULARY_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "drp/chem/junction_tree.h"

namespace drp::chem {

inline constexpr int kEmbeddingWidth = 64;

struct SmilesCorpus {
  std::vector<std::string> smiles;
  std::vector<std::size_t> line_numbers;  // 1-based
};

// One SMILES per line; blank lines and lines starting with '#' are skipped,
// as is anything after the first whitespace.
SmilesCorpus ReadSmilesCorpus(const std::filesystem::path &path);

class ClusterVocabulary {
 public:
  ClusterVocabulary() = default;
  // Labels must be unique (drp::DataError otherwise); order is kept.
  explicit ClusterVocabulary(std::vector<std::string> labels);

  // Sorted unique cluster labels over all molecules. A parse failure throws
  // drp::DataError naming the line number.
  static ClusterVocabulary Build(const SmilesCorpus &corpus);
  static ClusterVocabulary Build(std::span<const std::string> smiles);

  static ClusterVocabulary Load(const std::filesystem::path &path);
  void Save(const std::filesystem::path &path) const;

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string> &labels() const { return labels_; }
  // -1 when absent.
  int Find(const std::string &label) const;
  // Throws drp::VocabularyError naming the label when absent.
  int Index(const std::string &label) const;

  // SHA-256 over the newline-joined labels; stored in encoder checkpoints.
  std::string Hash() const;

  // size() x kEmbeddingWidth table drawn from Uniform(-0.1, 0.1).
  Eigen::MatrixXd InitialEmbeddings(std::uint64_t seed) const;

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
};

// Fills vocab_id of every cluster; throws drp::VocabularyError on the first
// unseen label.
void AssignVocabulary(JunctionTree &tree, const ClusterVocabulary &vocab);

}  // namespace drp::chem

#endif  // DRP_CHEM_VOCABULARY_H_
