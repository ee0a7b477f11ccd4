//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_AUTODIFF_GRAPH_H_
#define DRP_AUTODIFF_GRAPH_H_

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "drp/autodiff/tensor.h"
#include "drp/common/error.h"

namespace drp::ad {

// Handle to a node of a Graph. Only meaningful together with its graph.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Eager reverse-mode tape. Nodes are appended as operations execute, so the
// node list is always in topological order; Backward() walks it in reverse.
// Each node keeps its forward rule, which lets Recompute() re-evaluate the
// graph after a leaf changes.
template <typename T>
class Graph {
 public:
  using ForwardFn = std::function<void(Graph &, int)>;
  using BackwardFn = std::function<void(Graph &, int)>;

  struct Node {
    std::string_view kind;
    std::vector<int> inputs;
    Matrix<T> value;
    Matrix<T> grad;  // empty until a gradient reaches the node
    ForwardFn forward;
    BackwardFn backward;
    Parameter<T> *param = nullptr;
    bool requires_grad = false;
  };

  Graph() = default;
  Graph(const Graph &) = delete;
  Graph &operator=(const Graph &) = delete;

  Var Constant(Matrix<T> value) {
    Node n;
    n.kind = "constant";
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  Var Scalar(T v) {
    Matrix<T> m(1, 1);
    m(0, 0) = v;
    return Constant(std::move(m));
  }

  // Leaf bound to a parameter; Backward() accumulates into param.grad.
  Var Leaf(Parameter<T> &param) {
    Node n;
    n.kind = "parameter";
    n.value = param.value;
    n.param = &param;
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  // Appends an operation node and evaluates it immediately.
  Var Emit(std::string_view kind, std::vector<int> inputs, ForwardFn forward,
           BackwardFn backward) {
    Node n;
    n.kind = kind;
    n.inputs = std::move(inputs);
    for (int in : n.inputs) n.requires_grad |= nodes_[in].requires_grad;
    n.forward = std::move(forward);
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    const int id = static_cast<int>(nodes_.size()) - 1;
    nodes_[id].forward(*this, id);
    return Var{id};
  }

  const Matrix<T> &value(Var v) const { return nodes_[v.id].value; }
  const Matrix<T> &value(int id) const { return nodes_[id].value; }
  Matrix<T> &mutable_value(int id) { return nodes_[id].value; }
  const Matrix<T> &grad(Var v) const { return nodes_[v.id].grad; }
  const Matrix<T> &grad(int id) const { return nodes_[id].grad; }
  const Node &node(Var v) const { return nodes_[v.id]; }
  const Node &node(int id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }

  T scalar(Var v) const { return nodes_[v.id].value(0, 0); }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }

  void AccumulateGrad(int id, const Matrix<T> &g) {
    Node &n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  template <typename Expr>
  void AccumulateGradExpr(int id, const Expr &g) {
    Node &n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  // Reverse sweep from a 1x1 loss. Throws TrainingDiverged on a non-finite
  // loss value.
  void Backward(Var loss) {
    const Node &l = nodes_[loss.id];
    if (l.value.rows() != 1 || l.value.cols() != 1) {
      throw DimensionError("backward requires a scalar loss");
    }
    if (!l.value.allFinite()) throw TrainingDiverged("non-finite loss");
    for (auto &n : nodes_) n.grad.resize(0, 0);
    nodes_[loss.id].grad = Matrix<T>::Ones(1, 1);
    for (int id = loss.id; id >= 0; --id) {
      Node &n = nodes_[id];
      if (!n.requires_grad || n.grad.size() == 0) continue;
      if (n.param != nullptr) {
        n.param->grad += n.grad;
      } else if (n.backward) {
        n.backward(*this, id);
      }
    }
  }

  // Replaces the value of a constant or parameter leaf. Call Recompute()
  // afterwards to refresh dependent nodes.
  void SetLeafValue(Var v, Matrix<T> value) {
    Node &n = nodes_[v.id];
    if (n.forward) throw Error("SetLeafValue on a non-leaf node");
    if (value.rows() != n.value.rows() || value.cols() != n.value.cols()) {
      throw DimensionError("SetLeafValue shape mismatch");
    }
    n.value = std::move(value);
  }

  // Re-runs every forward rule in topological order.
  void Recompute() {
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
      if (nodes_[id].forward) nodes_[id].forward(*this, static_cast<int>(id));
    }
  }

  // Marks the nodes whose value depends on v (v included).
  std::vector<bool> Downstream(Var v) const {
    std::vector<bool> mark(nodes_.size(), false);
    mark[v.id] = true;
    for (std::size_t id = v.id + 1; id < nodes_.size(); ++id) {
      for (int in : nodes_[id].inputs) {
        if (mark[in]) {
          mark[id] = true;
          break;
        }
      }
    }
    return mark;
  }

 private:
  std::vector<Node> nodes_;
};

}  // namespace drp::ad

#endif  // DRP_AUTODIFF_GRAPH_H_
