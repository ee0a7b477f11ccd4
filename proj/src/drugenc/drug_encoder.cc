//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/drugenc/drug_encoder.h"

#include <array>

#include "drp/autodiff/ops.h"
#include "drp/chem/canonical.h"
#include "drp/chem/smiles.h"
#include "drp/common/error.h"

namespace drp::drugenc {

PreparedMolecule PrepareMolecule(std::string_view smiles, const chem::ClusterVocabulary &vocab) {
  const chem::MolecularGraph parsed = chem::ParseSmiles(smiles);
  PreparedMolecule m;
  m.smiles = std::string(smiles);
  m.graph = chem::Permute(parsed, chem::CanonicalRanks(parsed));
  m.tree = chem::Decompose(m.graph);
  chem::AssignVocabulary(m.tree, vocab);
  return m;
}

template <typename T>
DrugEncoder<T>::DrugEncoder(const chem::ClusterVocabulary &vocab, Rng &rng,
                            const DrugEncoderConfig &config)
    : vocab_(vocab), config_(config) {
  if (vocab.size() == 0) throw DataError("drug encoder needs a non-empty vocabulary");
  graph_ = GraphEncoder<T>(rng, config.iterations, config.width);
  tree_ = TreeEncoder<T>(vocab.InitialEmbeddings(config.embedding_seed), rng, config.width);
}

template <typename T>
typename DrugEncoder<T>::Output DrugEncoder<T>::Forward(
    ad::Graph<T> &g, std::span<const PreparedMolecule *const> molecules, Rng *sample_rng) {
  std::vector<const chem::MolecularGraph *> graphs;
  std::vector<const chem::JunctionTree *> trees;
  for (const auto *m : molecules) {
    graphs.push_back(&m->graph);
    trees.push_back(&m->tree);
  }
  const auto graph_out = graph_.Forward(g, GraphBatch<T>::Make(graphs));
  const auto tree_out = tree_.Forward(g, TreeBatch::Make(trees));
  const std::array<Var, 2> mus = {graph_out.mu, tree_out.mu};
  const std::array<Var, 2> logvars = {graph_out.logvar, tree_out.logvar};
  Var mu = ad::ConcatCols<T>(g, mus);
  Var kl = ad::Add(g, ad::KlStdNormal(g, graph_out.mu, graph_out.logvar),
                   ad::KlStdNormal(g, tree_out.mu, tree_out.logvar));
  Var z = mu;
  if (sample_rng != nullptr) {
    Matrix<T> eps(static_cast<Eigen::Index>(molecules.size()), kDrugLatentWidth);
    for (Eigen::Index i = 0; i < eps.size(); ++i) {
      eps.data()[i] = static_cast<T>(sample_rng->Normal());
    }
    z = ad::Reparameterize(g, mu, ad::ConcatCols<T>(g, logvars), eps);
  }
  return {z, mu, kl};
}

template <typename T>
Matrix<T> DrugEncoder<T>::Means(std::span<const PreparedMolecule *const> molecules) {
  ad::Graph<T> g;
  return g.value(Forward(g, molecules).mu);
}

template <typename T>
Matrix<T> DrugEncoder<T>::Encode(std::string_view smiles) {
  const PreparedMolecule m = PrepareMolecule(smiles, vocab_);
  const PreparedMolecule *one[] = {&m};
  return Means(one);
}

template <typename T>
std::vector<ad::Parameter<T> *> DrugEncoder<T>::Parameters() {
  auto out = graph_.Parameters();
  for (auto *p : tree_.Parameters()) out.push_back(p);
  return out;
}

template <typename T>
void DrugEncoder<T>::Save(ad::Checkpoint &ckpt, const std::string &prefix) const {
  ckpt.PutInts(prefix + "drug.config",
               {config_.iterations, config_.width,
                static_cast<std::int64_t>(config_.embedding_seed)});
  std::string labels;
  for (const auto &l : vocab_.labels()) labels += l + "\n";
  ckpt.PutText(prefix + "drug.vocabulary", labels);
  ckpt.PutText(prefix + "drug.vocabulary_hash", vocab_.Hash());
  auto *self = const_cast<DrugEncoder<T> *>(this);
  for (auto *p : self->Parameters()) ckpt.PutMatrix(prefix + p->name, p->value);
}

template <typename T>
DrugEncoder<T> DrugEncoder<T>::Load(const ad::Checkpoint &ckpt, const std::string &prefix,
                                    const chem::ClusterVocabulary *expected_vocab) {
  const auto c = ckpt.GetInts(prefix + "drug.config");
  if (c.size() != 3) throw DataError("drug encoder checkpoint: malformed config entry");
  DrugEncoderConfig config;
  config.iterations = static_cast<int>(c[0]);
  config.width = static_cast<int>(c[1]);
  config.embedding_seed = static_cast<std::uint64_t>(c[2]);
  const std::string text = ckpt.GetText(prefix + "drug.vocabulary");
  std::vector<std::string> labels;
  for (std::size_t start = 0; start < text.size();) {
    const auto end = text.find('\n', start);
    labels.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  const chem::ClusterVocabulary vocab(labels);
  const std::string hash = ckpt.GetText(prefix + "drug.vocabulary_hash");
  if (vocab.Hash() != hash) throw DataError("drug encoder checkpoint: vocabulary hash mismatch");
  if (expected_vocab != nullptr && expected_vocab->Hash() != hash) {
    throw DataError("drug encoder checkpoint was trained against a different vocabulary (hash " +
                    hash.substr(0, 12) + ", expected " + expected_vocab->Hash().substr(0, 12) +
                    ")");
  }
  Rng rng(0);
  DrugEncoder<T> enc(vocab, rng, config);
  for (auto *p : enc.Parameters()) {
    Matrix<T> v = ckpt.GetMatrix<T>(prefix + p->name);
    if (v.rows() != p->value.rows() || v.cols() != p->value.cols()) {
      throw DimensionError("drug encoder checkpoint shape mismatch for " + p->name);
    }
    p->value = std::move(v);
    p->ZeroGrad();
  }
  return enc;
}

template class DrugEncoder<float>;
template class DrugEncoder<double>;

}  // namespace drp::drugenc
