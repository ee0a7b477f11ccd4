//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_DRUGENC_GRAPH_ENCODER_H_
#define DRP_DRUGENC_GRAPH_ENCODER_H_

#include <span>
#include <string>
#include <vector>

#include "drp/autodiff/checkpoint.h"
#include "drp/autodiff/graph.h"
#include "drp/autodiff/layers.h"
#include "drp/chem/molecule.h"
#include "drp/common/rng.h"

namespace drp::drugenc {

using ad::Matrix;
using ad::Var;

inline constexpr int kMessageWidth = 128;
inline constexpr int kHalfLatentWidth = 28;
inline constexpr int kDrugLatentWidth = 2 * kHalfLatentWidth;

// Several molecular graphs packed for one encoder pass. Directed edge 2b is
// bond b read u -> v and 2b + 1 the reverse, so rev(e) = e ^ 1 within a
// molecule; offsets are applied per molecule.
template <typename T>
struct GraphBatch {
  Matrix<T> atom_features;  // atoms x kAtomFeatureWidth
  Matrix<T> edge_features;  // directed edges x kBondFeatureWidth
  std::vector<int> edge_source;
  std::vector<int> edge_target;
  std::vector<int> edge_reverse;
  std::vector<int> atom_molecule;
  std::vector<T> inverse_size;  // 1 / |V| per molecule
  int num_molecules = 0;

  // Throws DomainError for a graph without atoms.
  static GraphBatch Make(std::span<const chem::MolecularGraph *const> graphs);
};

// Loopy message passing over bonds followed by mean pooling:
//   M_uv(t) = ReLU(a_u W_u + b_uv W_e + (sum_{w in N(u) \ v} M_wu(t-1)) W_m)
//   L_u     = ReLU(a_u U_a + (sum_v M_vu(T)) U_m)
//   h_G     = mean_u L_u;   mu = h_G W_mu + b_mu,  logvar = h_G W_s + b_s
template <typename T>
class GraphEncoder {
 public:
  struct Output {
    Var mu;      // molecules x 28
    Var logvar;  // molecules x 28
  };

  GraphEncoder() = default;
  GraphEncoder(Rng &rng, int iterations = 6, int width = kMessageWidth);

  Output Forward(ad::Graph<T> &g, const GraphBatch<T> &batch);
  // Posterior mean for a single molecule.
  Matrix<T> Mean(const chem::MolecularGraph &graph);

  int iterations() const { return iterations_; }
  int width() const { return width_; }
  std::vector<ad::Parameter<T> *> Parameters();

 private:
  template <typename U>
  friend class GraphEncoder;

  int iterations_ = 6;
  int width_ = kMessageWidth;
  ad::Parameter<T> w_atom_;
  ad::Parameter<T> w_bond_;
  ad::Parameter<T> w_message_;
  ad::Parameter<T> u_atom_;
  ad::Parameter<T> u_message_;
  ad::Dense<T> mu_head_;
  ad::Dense<T> logvar_head_;
};

extern template struct GraphBatch<float>;
extern template struct GraphBatch<double>;
extern template class GraphEncoder<float>;
extern template class GraphEncoder<double>;

}  // namespace drp::drugenc

#endif  // DRP_DRUGENC_GRAPH_ENCODER_H_
