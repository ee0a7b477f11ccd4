//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_DRUGENC_DRUG_ENCODER_H_
#define DRP_DRUGENC_DRUG_ENCODER_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drp/autodiff/checkpoint.h"
#include "drp/chem/vocabulary.h"
#include "drp/drugenc/graph_encoder.h"
#include "drp/drugenc/tree_encoder.h"

namespace drp::drugenc {

// A parsed molecule renumbered into canonical atom order, with its junction
// tree mapped onto a vocabulary. Canonical numbering makes every encoder
// output independent of the atom order of the input SMILES.
struct PreparedMolecule {
  std::string smiles;
  chem::MolecularGraph graph;
  chem::JunctionTree tree;
};

// Throws ParseError for bad SMILES and VocabularyError for unseen clusters.
PreparedMolecule PrepareMolecule(std::string_view smiles, const chem::ClusterVocabulary &vocab);

struct DrugEncoderConfig {
  int iterations = 6;
  int width = kMessageWidth;
  std::uint64_t embedding_seed = 0;
};

// Graph and tree encoders side by side; z_drug = [z_G | z_tree], 56 wide.
template <typename T>
class DrugEncoder {
 public:
  struct Output {
    Var z;   // molecules x 56: means, or samples when an rng is given
    Var mu;  // molecules x 56
    Var kl;  // KL of both heads, averaged over molecules
  };

  DrugEncoder() = default;
  DrugEncoder(const chem::ClusterVocabulary &vocab, Rng &rng, const DrugEncoderConfig &config = {});

  Output Forward(ad::Graph<T> &g, std::span<const PreparedMolecule *const> molecules,
                 Rng *sample_rng = nullptr);
  // Deterministic latent means, one row per molecule.
  Matrix<T> Means(std::span<const PreparedMolecule *const> molecules);
  Matrix<T> Encode(std::string_view smiles);

  GraphEncoder<T> &graph_encoder() { return graph_; }
  TreeEncoder<T> &tree_encoder() { return tree_; }
  const chem::ClusterVocabulary &vocabulary() const { return vocab_; }
  const DrugEncoderConfig &config() const { return config_; }
  std::vector<ad::Parameter<T> *> Parameters();

  // Stores both encoders, the vocabulary labels and their hash.
  void Save(ad::Checkpoint &ckpt, const std::string &prefix) const;
  // Throws DataError when the stored hash disagrees with the stored labels
  // or with expected_vocab.
  static DrugEncoder Load(const ad::Checkpoint &ckpt, const std::string &prefix,
                          const chem::ClusterVocabulary *expected_vocab = nullptr);

  template <typename U>
  void CopyFrom(DrugEncoder<U> &other) {
    ad::CopyParameterValues(Parameters(), other.Parameters());
  }

 private:
  chem::ClusterVocabulary vocab_;
  DrugEncoderConfig config_;
  GraphEncoder<T> graph_;
  TreeEncoder<T> tree_;
};

extern template class DrugEncoder<float>;
extern template class DrugEncoder<double>;

}  // namespace drp::drugenc

#endif  // DRP_DRUGENC_DRUG_ENCODER_H_
