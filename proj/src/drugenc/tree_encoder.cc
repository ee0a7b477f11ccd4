//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/drugenc/tree_encoder.h"

#include <algorithm>
#include <map>

#include "drp/autodiff/ops.h"
#include "drp/common/error.h"

namespace drp::drugenc {

TreeBatch TreeBatch::Make(std::span<const chem::JunctionTree *const> trees) {
  TreeBatch b;
  b.num_molecules = static_cast<int>(trees.size());
  // (phase, depth) -> edges; phase 1 runs deepest first, phase 2 shallowest first.
  std::map<int, std::vector<int>> up;
  std::map<int, std::vector<int>> down;
  int offset = 0;
  for (int m = 0; m < b.num_molecules; ++m) {
    const chem::JunctionTree &t = *trees[m];
    const int n = static_cast<int>(t.clusters.size());
    if (n == 0) throw DomainError("cannot encode an empty junction tree");
    for (const auto &c : t.clusters) {
      if (c.vocab_id < 0) throw VocabularyError(c.label);
      b.vocab_ids.push_back(c.vocab_id);
      b.cluster_molecule.push_back(m);
    }
    const auto adj = t.Adjacency();
    std::vector<int> depth(n, -1);
    std::vector<int> parent(n, -1);
    std::vector<int> queue = {t.root};
    depth[t.root] = 0;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const int u = queue[q];
      for (int v : adj[u]) {
        if (depth[v] >= 0) continue;
        depth[v] = depth[u] + 1;
        parent[v] = u;
        queue.push_back(v);
      }
    }
    for (const auto &[a, c] : t.edges) {
      for (auto [i, j] : {std::pair{a, c}, std::pair{c, a}}) {
        const int e = static_cast<int>(b.edge_source.size());
        b.edge_source.push_back(offset + i);
        b.edge_target.push_back(offset + j);
        if (parent[i] == j) {
          up[-depth[i]].push_back(e);
        } else {
          down[depth[i]].push_back(e);
        }
      }
    }
    b.inverse_size.push_back(1.0 / n);
    offset += n;
  }
  auto by_endpoints = [&](int x, int y) {
    return std::pair{b.edge_source[x], b.edge_target[x]} <
           std::pair{b.edge_source[y], b.edge_target[y]};
  };
  for (auto *phase : {&up, &down}) {
    for (auto &[key, edges] : *phase) {
      std::sort(edges.begin(), edges.end(), by_endpoints);
      b.levels.push_back({phase == &up ? 1 : 2, edges});
    }
  }
  return b;
}

template <typename T>
TreeEncoder<T>::TreeEncoder(const Eigen::MatrixXd &embeddings, Rng &rng, int width)
    : width_(width) {
  const int x = static_cast<int>(embeddings.cols());
  const int h = width;
  embedding_ = ad::Parameter<T>("tree.embedding", embeddings.cast<T>());
  w_candidate_ = ad::Parameter<T>("tree.w_candidate", ad::FanInUniform<T>(x + h, x, h, rng));
  u_candidate_ = ad::Parameter<T>("tree.u_candidate", ad::FanInUniform<T>(x + h, h, h, rng));
  w_update_ = ad::Dense<T>("tree.w_update", x, h, rng);
  u_update_ = ad::Parameter<T>("tree.u_update", ad::FanInUniform<T>(x + h, h, h, rng));
  w_reset_ = ad::Dense<T>("tree.w_reset", x, h, rng);
  u_reset_ = ad::Parameter<T>("tree.u_reset", ad::FanInUniform<T>(x + h, h, h, rng));
  w_out_ = ad::Parameter<T>("tree.w_out", ad::FanInUniform<T>(x + h, x, h, rng));
  u_out_ = ad::Parameter<T>("tree.u_out", ad::FanInUniform<T>(x + h, h, h, rng));
  mu_head_ = ad::Dense<T>("tree.mu", h, kHalfLatentWidth, rng);
  logvar_head_ = ad::Dense<T>("tree.logvar", h, kHalfLatentWidth, rng);
}

template <typename T>
typename TreeEncoder<T>::Output TreeEncoder<T>::Forward(ad::Graph<T> &g, const TreeBatch &batch,
                                                       TreeTrace *trace) {
  const int n_clusters = static_cast<int>(batch.vocab_ids.size());
  const int n_edges = static_cast<int>(batch.edge_source.size());
  for (int id : batch.vocab_ids) {
    if (id >= vocabulary_size()) throw DimensionError("vocabulary id beyond embedding table");
  }
  if (trace != nullptr) {
    *trace = TreeTrace{};
    trace->edge_visits.assign(n_edges, 0);
  }
  auto note_gate = [&](Var v) {
    if (trace == nullptr) return;
    trace->gate_min = std::min<double>(trace->gate_min, g.value(v).minCoeff());
    trace->gate_max = std::max<double>(trace->gate_max, g.value(v).maxCoeff());
  };

  Var x = ad::GatherRows(g, g.Leaf(embedding_), batch.vocab_ids);
  Var x_candidate = ad::MatMul(g, x, g.Leaf(w_candidate_));
  Var x_update = w_update_.Forward(g, x);
  Var x_reset = w_reset_.Forward(g, x);
  Var u_candidate = g.Leaf(u_candidate_);
  Var u_update = g.Leaf(u_update_);
  Var u_reset = g.Leaf(u_reset_);

  std::vector<std::vector<int>> incoming(n_clusters);
  for (int e = 0; e < n_edges; ++e) incoming[batch.edge_target[e]].push_back(e);

  // Message of edge e lives in row where_row[e] of chunks[where_chunk[e]].
  std::vector<Var> chunks;
  std::vector<int> where_chunk(n_edges, -1);
  std::vector<int> where_row(n_edges, -1);

  for (const auto &level : batch.levels) {
    const int n = static_cast<int>(level.edges.size());
    struct Pairs {
      std::vector<int> rows;
      std::vector<int> local;
      std::vector<int> source;
    };
    std::map<int, Pairs> by_chunk;
    std::vector<int> sources;
    for (int li = 0; li < n; ++li) {
      const int e = level.edges[li];
      const int i = batch.edge_source[e];
      const int j = batch.edge_target[e];
      sources.push_back(i);
      for (int k : incoming[i]) {
        if (batch.edge_source[k] == j) continue;
        if (where_chunk[k] < 0) throw Error("tree message schedule out of order");
        Pairs &p = by_chunk[where_chunk[k]];
        p.rows.push_back(where_row[k]);
        p.local.push_back(li);
        p.source.push_back(i);
      }
      if (trace != nullptr) {
        ++trace->edge_visits[e];
        ++trace->phase_messages[level.phase - 1];
      }
    }
    Var sum;
    Var gated;
    for (const auto &[c, p] : by_chunk) {
      Var m = ad::GatherRows(g, chunks[c], p.rows);
      Var s_part = ad::ScatterAddRows(g, m, p.local, n);
      sum = sum.valid() ? ad::Add(g, sum, s_part) : s_part;
      if (force_reset_zero_) continue;
      Var r = ad::Sigmoid(g, ad::Add(g, ad::GatherRows(g, x_reset, p.source),
                                     ad::MatMul(g, m, u_reset)));
      note_gate(r);
      Var g_part = ad::ScatterAddRows(g, ad::Mul(g, r, m), p.local, n);
      gated = gated.valid() ? ad::Add(g, gated, g_part) : g_part;
    }
    Var z_in = ad::GatherRows(g, x_update, sources);
    if (sum.valid()) z_in = ad::Add(g, z_in, ad::MatMul(g, sum, u_update));
    Var z = ad::Sigmoid(g, z_in);
    note_gate(z);
    Var c_in = ad::GatherRows(g, x_candidate, sources);
    if (gated.valid()) c_in = ad::Add(g, c_in, ad::MatMul(g, gated, u_candidate));
    Var candidate = ad::Tanh(g, c_in);
    Var message = sum.valid() ? ad::Add(g, sum, ad::Mul(g, z, ad::Sub(g, candidate, sum)))
                              : ad::Mul(g, z, candidate);
    for (int li = 0; li < n; ++li) {
      where_chunk[level.edges[li]] = static_cast<int>(chunks.size());
      where_row[level.edges[li]] = li;
    }
    chunks.push_back(message);
  }

  Var pre = ad::MatMul(g, x, g.Leaf(w_out_));
  if (!chunks.empty()) {
    Var inc;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      std::vector<int> targets;
      for (int e : batch.levels[c].edges) targets.push_back(batch.edge_target[e]);
      Var part = ad::ScatterAddRows(g, chunks[c], targets, n_clusters);
      inc = inc.valid() ? ad::Add(g, inc, part) : part;
    }
    pre = ad::Add(g, pre, ad::MatMul(g, inc, g.Leaf(u_out_)));
  }
  Var readout = ad::Relu(g, pre);
  std::vector<T> inverse(batch.inverse_size.begin(), batch.inverse_size.end());
  Var pooled = ad::RowScale(
      g, ad::ScatterAddRows(g, readout, batch.cluster_molecule, batch.num_molecules), inverse);
  return {mu_head_.Forward(g, pooled), logvar_head_.Forward(g, pooled)};
}

template <typename T>
Matrix<T> TreeEncoder<T>::Mean(const chem::JunctionTree &tree) {
  const chem::JunctionTree *one[] = {&tree};
  const TreeBatch batch = TreeBatch::Make(one);
  ad::Graph<T> g;
  return g.value(Forward(g, batch).mu);
}

template <typename T>
std::vector<ad::Parameter<T> *> TreeEncoder<T>::Parameters() {
  std::vector<ad::Parameter<T> *> out = {&embedding_, &w_candidate_, &u_candidate_};
  w_update_.Collect(out);
  out.push_back(&u_update_);
  w_reset_.Collect(out);
  out.push_back(&u_reset_);
  out.push_back(&w_out_);
  out.push_back(&u_out_);
  mu_head_.Collect(out);
  logvar_head_.Collect(out);
  return out;
}

template class TreeEncoder<float>;
template class TreeEncoder<double>;

}  // namespace drp::drugenc
