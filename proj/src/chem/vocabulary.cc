//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/chem/vocabulary.h"

#include <algorithm>
#include <set>

#include "drp/chem/smiles.h"
#include "drp/common/csv.h"
#include "drp/common/error.h"
#include "drp/common/hash.h"
#include "drp/common/rng.h"

namespace drp::chem {

SmilesCorpus ReadSmilesCorpus(const std::filesystem::path &path) {
  SmilesCorpus corpus;
  const std::vector<std::string> lines = ReadLines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string_view::npos || line[start] == '#') continue;
    line.remove_prefix(start);
    line = line.substr(0, line.find_first_of(" \t\r"));
    corpus.smiles.emplace_back(line);
    corpus.line_numbers.push_back(i + 1);
  }
  return corpus;
}

ClusterVocabulary::ClusterVocabulary(std::vector<std::string> labels) : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], static_cast<int>(i)).second) {
      throw DataError("duplicate vocabulary label: " + labels_[i]);
    }
  }
}

ClusterVocabulary ClusterVocabulary::Build(const SmilesCorpus &corpus) {
  std::set<std::string> labels;
  for (std::size_t i = 0; i < corpus.smiles.size(); ++i) {
    try {
      const JunctionTree tree = Decompose(ParseSmiles(corpus.smiles[i]));
      for (const Cluster &c : tree.clusters) labels.insert(c.label);
    } catch (const ParseError &e) {
      const std::size_t line = i < corpus.line_numbers.size() ? corpus.line_numbers[i] : i + 1;
      throw DataError("line " + std::to_string(line) + ": " + e.what());
    }
  }
  return ClusterVocabulary(std::vector<std::string>(labels.begin(), labels.end()));
}

ClusterVocabulary ClusterVocabulary::Build(std::span<const std::string> smiles) {
  SmilesCorpus corpus;
  corpus.smiles.assign(smiles.begin(), smiles.end());
  for (std::size_t i = 0; i < smiles.size(); ++i) corpus.line_numbers.push_back(i + 1);
  return Build(corpus);
}

ClusterVocabulary ClusterVocabulary::Load(const std::filesystem::path &path) {
  std::vector<std::string> labels = ReadLines(path);
  while (!labels.empty() && labels.back().empty()) labels.pop_back();
  return ClusterVocabulary(std::move(labels));
}

void ClusterVocabulary::Save(const std::filesystem::path &path) const {
  std::string text;
  for (const std::string &label : labels_) text += label + "\n";
  WriteTextFile(path, text);
}

int ClusterVocabulary::Find(const std::string &label) const {
  auto it = index_.find(label);
  return it == index_.end() ? -1 : it->second;
}

int ClusterVocabulary::Index(const std::string &label) const {
  const int id = Find(label);
  if (id < 0) throw VocabularyError(label);
  return id;
}

std::string ClusterVocabulary::Hash() const {
  std::string joined;
  for (const std::string &label : labels_) joined += label + "\n";
  return Sha256Hex(joined);
}

Eigen::MatrixXd ClusterVocabulary::InitialEmbeddings(std::uint64_t seed) const {
  Rng rng(seed);
  Eigen::MatrixXd table(static_cast<Eigen::Index>(labels_.size()), kEmbeddingWidth);
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.cols(); ++j) table(i, j) = rng.Uniform(-0.1, 0.1);
  }
  return table;
}

void AssignVocabulary(JunctionTree &tree, const ClusterVocabulary &vocab) {
  for (Cluster &c : tree.clusters) c.vocab_id = vocab.Index(c.label);
}

}  // namespace drp::chem
