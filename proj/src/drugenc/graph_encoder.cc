//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/drugenc/graph_encoder.h"

#include "drp/autodiff/ops.h"
#include "drp/common/error.h"

namespace drp::drugenc {

template <typename T>
GraphBatch<T> GraphBatch<T>::Make(std::span<const chem::MolecularGraph *const> graphs) {
  GraphBatch<T> b;
  b.num_molecules = static_cast<int>(graphs.size());
  int atoms = 0;
  int edges = 0;
  for (const auto *g : graphs) {
    if (g->num_atoms() == 0) throw DomainError("cannot encode a molecule without atoms");
    atoms += g->num_atoms();
    edges += 2 * g->num_bonds();
  }
  b.atom_features = Matrix<T>::Zero(atoms, chem::kAtomFeatureWidth);
  b.edge_features = Matrix<T>::Zero(edges, chem::kBondFeatureWidth);
  std::vector<double> af(chem::kAtomFeatureWidth);
  std::vector<double> bf(chem::kBondFeatureWidth);
  int atom_offset = 0;
  int edge_offset = 0;
  for (int m = 0; m < b.num_molecules; ++m) {
    const chem::MolecularGraph &g = *graphs[m];
    for (int i = 0; i < g.num_atoms(); ++i) {
      chem::AtomFeatures(g, i, af);
      for (int k = 0; k < chem::kAtomFeatureWidth; ++k) {
        b.atom_features(atom_offset + i, k) = static_cast<T>(af[k]);
      }
      b.atom_molecule.push_back(m);
    }
    for (int bi = 0; bi < g.num_bonds(); ++bi) {
      const chem::Bond &bond = g.bond(bi);
      chem::BondFeatures(bond.order, bf);
      const int e = edge_offset + 2 * bi;
      for (int k = 0; k < chem::kBondFeatureWidth; ++k) {
        b.edge_features(e, k) = static_cast<T>(bf[k]);
        b.edge_features(e + 1, k) = static_cast<T>(bf[k]);
      }
      b.edge_source.push_back(atom_offset + bond.u);
      b.edge_target.push_back(atom_offset + bond.v);
      b.edge_reverse.push_back(e + 1);
      b.edge_source.push_back(atom_offset + bond.v);
      b.edge_target.push_back(atom_offset + bond.u);
      b.edge_reverse.push_back(e);
    }
    b.inverse_size.push_back(T(1) / static_cast<T>(g.num_atoms()));
    atom_offset += g.num_atoms();
    edge_offset += 2 * g.num_bonds();
  }
  return b;
}

template <typename T>
GraphEncoder<T>::GraphEncoder(Rng &rng, int iterations, int width)
    : iterations_(iterations), width_(width) {
  if (iterations < 1) throw DomainError("graph encoder needs at least one iteration");
  const int a = chem::kAtomFeatureWidth;
  const int e = chem::kBondFeatureWidth;
  // Atom and bond inputs share one fan-in, as if concatenated.
  w_atom_ = ad::Parameter<T>("graph.w_atom", ad::FanInUniform<T>(a + e, a, width, rng));
  w_bond_ = ad::Parameter<T>("graph.w_bond", ad::FanInUniform<T>(a + e, e, width, rng));
  w_message_ = ad::Parameter<T>("graph.w_message", ad::FanInUniform<T>(width, width, width, rng));
  u_atom_ = ad::Parameter<T>("graph.u_atom", ad::FanInUniform<T>(a + width, a, width, rng));
  u_message_ =
      ad::Parameter<T>("graph.u_message", ad::FanInUniform<T>(a + width, width, width, rng));
  mu_head_ = ad::Dense<T>("graph.mu", width, kHalfLatentWidth, rng);
  logvar_head_ = ad::Dense<T>("graph.logvar", width, kHalfLatentWidth, rng);
}

template <typename T>
typename GraphEncoder<T>::Output GraphEncoder<T>::Forward(ad::Graph<T> &g,
                                                         const GraphBatch<T> &batch) {
  const int n_atoms = static_cast<int>(batch.atom_features.rows());
  const int n_edges = static_cast<int>(batch.edge_source.size());
  Var atoms = g.Constant(batch.atom_features);
  Var incoming;
  if (n_edges == 0) {
    incoming = g.Constant(Matrix<T>::Zero(n_atoms, width_));
  } else {
    Var source_atoms = ad::GatherRows(g, atoms, batch.edge_source);
    Var base = ad::Add(g, ad::MatMul(g, source_atoms, g.Leaf(w_atom_)),
                       ad::MatMul(g, g.Constant(batch.edge_features), g.Leaf(w_bond_)));
    Var w_message = g.Leaf(w_message_);
    // M(0) = 0, so the first iteration reduces to ReLU(base).
    Var messages = ad::Relu(g, base);
    for (int t = 1; t < iterations_; ++t) {
      Var node_sum = ad::ScatterAddRows(g, messages, batch.edge_target, n_atoms);
      Var excluding_reverse = ad::Sub(g, ad::GatherRows(g, node_sum, batch.edge_source),
                                      ad::GatherRows(g, messages, batch.edge_reverse));
      messages = ad::Relu(g, ad::Add(g, base, ad::MatMul(g, excluding_reverse, w_message)));
    }
    incoming = ad::ScatterAddRows(g, messages, batch.edge_target, n_atoms);
  }
  Var readout = ad::Relu(g, ad::Add(g, ad::MatMul(g, atoms, g.Leaf(u_atom_)),
                                    ad::MatMul(g, incoming, g.Leaf(u_message_))));
  Var pooled = ad::RowScale(
      g, ad::ScatterAddRows(g, readout, batch.atom_molecule, batch.num_molecules),
      batch.inverse_size);
  return {mu_head_.Forward(g, pooled), logvar_head_.Forward(g, pooled)};
}

template <typename T>
Matrix<T> GraphEncoder<T>::Mean(const chem::MolecularGraph &graph) {
  const chem::MolecularGraph *one[] = {&graph};
  const GraphBatch<T> batch = GraphBatch<T>::Make(one);
  ad::Graph<T> g;
  return g.value(Forward(g, batch).mu);
}

template <typename T>
std::vector<ad::Parameter<T> *> GraphEncoder<T>::Parameters() {
  std::vector<ad::Parameter<T> *> out = {&w_atom_, &w_bond_, &w_message_, &u_atom_, &u_message_};
  mu_head_.Collect(out);
  logvar_head_.Collect(out);
  return out;
}

template struct GraphBatch<float>;
template struct GraphBatch<double>;
template class GraphEncoder<float>;
template class GraphEncoder<double>;

}  // namespace drp::drugenc
