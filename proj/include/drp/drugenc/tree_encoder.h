//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_DRUGENC_TREE_ENCODER_H_
#define DRP_DRUGENC_TREE_ENCODER_H_

#include <span>
#include <string>
#include <vector>

#include "drp/autodiff/graph.h"
#include "drp/autodiff/layers.h"
#include "drp/chem/junction_tree.h"
#include "drp/common/rng.h"
#include "drp/drugenc/graph_encoder.h"

namespace drp::drugenc {

// Junction trees packed for one pass, with the two-phase message schedule.
// Phase 1 sends child -> parent messages, deepest sources first; phase 2
// sends parent -> child messages, shallowest sources first. Each schedule
// level holds messages that depend only on earlier levels.
struct TreeBatch {
  struct Level {
    int phase = 1;
    std::vector<int> edges;  // directed edge ids, ascending (molecule, source, target)
  };
  std::vector<int> vocab_ids;  // per cluster
  std::vector<int> cluster_molecule;
  std::vector<int> edge_source;
  std::vector<int> edge_target;
  std::vector<Level> levels;
  std::vector<double> inverse_size;
  int num_molecules = 0;

  // Throws VocabularyError when a cluster has no vocabulary id.
  static TreeBatch Make(std::span<const chem::JunctionTree *const> trees);
};

// Instrumentation filled by TreeEncoder::Forward when requested.
struct TreeTrace {
  std::vector<int> phase_messages = {0, 0};  // messages computed in phase 1, 2
  std::vector<int> edge_visits;              // per directed edge, both phases
  double gate_min = 1.0;
  double gate_max = 0.0;
};

// GRU message passing over the junction tree (x_i = cluster embedding):
//   s_ij  = sum_{k in N(i) \ j} m_ki
//   z_ij  = sigmoid(x_i W_z + s_ij U_z + b_z)
//   r_ki  = sigmoid(x_i W_r + m_ki U_r + b_r)
//   m~_ij = tanh(x_i W + (sum_{k in N(i) \ j} r_ki * m_ki) U)
//   m_ij  = (1 - z_ij) * s_ij + z_ij * m~_ij
// Readout L_i = ReLU(x_i W_o + (sum_k m_ki) U_o), mean over clusters, then
// affine heads for mu and logvar.
template <typename T>
class TreeEncoder {
 public:
  struct Output {
    Var mu;
    Var logvar;
  };

  TreeEncoder() = default;
  // embeddings: vocabulary size x embedding width, trainable.
  TreeEncoder(const Eigen::MatrixXd &embeddings, Rng &rng, int width = kMessageWidth);

  Output Forward(ad::Graph<T> &g, const TreeBatch &batch, TreeTrace *trace = nullptr);
  Matrix<T> Mean(const chem::JunctionTree &tree);

  // Test hook: pins every reset gate to zero.
  void set_force_reset_zero(bool v) { force_reset_zero_ = v; }

  int width() const { return width_; }
  int vocabulary_size() const { return static_cast<int>(embedding_.value.rows()); }
  std::vector<ad::Parameter<T> *> Parameters();

 private:
  int width_ = kMessageWidth;
  bool force_reset_zero_ = false;
  ad::Parameter<T> embedding_;
  ad::Parameter<T> w_candidate_;
  ad::Parameter<T> u_candidate_;
  ad::Dense<T> w_update_;
  ad::Parameter<T> u_update_;
  ad::Dense<T> w_reset_;
  ad::Parameter<T> u_reset_;
  ad::Parameter<T> w_out_;
  ad::Parameter<T> u_out_;
  ad::Dense<T> mu_head_;
  ad::Dense<T> logvar_head_;
};

extern template class TreeEncoder<float>;
extern template class TreeEncoder<double>;

}  // namespace drp::drugenc

#endif  // DRP_DRUGENC_TREE_ENCODER_H_
