//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/autodiff/ops.h"

#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "drp/common/error.h"

namespace drp::ad {
namespace {

enum class Broadcast { kSame, kLeftScalar, kRightScalar };

std::string ShapeStr(Eigen::Index r, Eigen::Index c) {
  return "[" + std::to_string(r) + "x" + std::to_string(c) + "]";
}

template <typename T>
Broadcast CheckBinary(const Matrix<T> &a, const Matrix<T> &b, const char *op) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::kSame;
  if (a.size() == 1) return Broadcast::kLeftScalar;
  if (b.size() == 1) return Broadcast::kRightScalar;
  throw DimensionError(std::string(op) + ": incompatible shapes " +
                       ShapeStr(a.rows(), a.cols()) + " and " +
                       ShapeStr(b.rows(), b.cols()));
}

template <typename T>
Var Unary(Graph<T> &g, std::string_view kind, Var x,
          std::function<Matrix<T>(const Matrix<T> &)> f,
          std::function<Matrix<T>(const Matrix<T> &x, const Matrix<T> &y,
                                  const Matrix<T> &gy)>
              df) {
  return g.Emit(
      kind, {x.id},
      [f](Graph<T> &gr, int id) {
        gr.mutable_value(id) = f(gr.value(gr.node(id).inputs[0]));
      },
      [df](Graph<T> &gr, int id) {
        const int in = gr.node(id).inputs[0];
        gr.AccumulateGrad(in, df(gr.value(in), gr.value(id), gr.grad(id)));
      });
}

}  // namespace

template <typename T>
Var MatMul(Graph<T> &g, Var a, Var b) {
  const auto &av = g.value(a);
  const auto &bv = g.value(b);
  if (av.cols() != bv.rows()) {
    throw DimensionError("matmul: inner dimensions differ " +
                         ShapeStr(av.rows(), av.cols()) + " x " +
                         ShapeStr(bv.rows(), bv.cols()));
  }
  return g.Emit(
      "matmul", {a.id, b.id},
      [](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        auto &out = gr.mutable_value(id);
        out.noalias() = gr.value(in[0]) * gr.value(in[1]);
      },
      [](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        const auto &gy = gr.grad(id);
        if (gr.requires_grad(in[0])) {
          gr.AccumulateGradExpr(in[0], gy * gr.value(in[1]).transpose());
        }
        if (gr.requires_grad(in[1])) {
          gr.AccumulateGradExpr(in[1], gr.value(in[0]).transpose() * gy);
        }
      });
}

template <typename T>
Var Linear(Graph<T> &g, Var x, Var weight, Var bias) {
  const auto &xv = g.value(x);
  const auto &wv = g.value(weight);
  if (xv.cols() != wv.rows()) {
    throw DimensionError("linear: input width " + std::to_string(xv.cols()) +
                         " does not match weight " +
                         ShapeStr(wv.rows(), wv.cols()));
  }
  if (!bias.valid()) return MatMul(g, x, weight);
  const auto &bv = g.value(bias);
  if (bv.rows() != 1 || bv.cols() != wv.cols()) {
    throw DimensionError("linear: bias shape " + ShapeStr(bv.rows(), bv.cols()));
  }
  return g.Emit(
      "linear", {x.id, weight.id, bias.id},
      [](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        auto &out = gr.mutable_value(id);
        out.noalias() = gr.value(in[0]) * gr.value(in[1]);
        out.rowwise() += gr.value(in[2]).row(0);
      },
      [](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        const auto &gy = gr.grad(id);
        if (gr.requires_grad(in[0])) {
          gr.AccumulateGradExpr(in[0], gy * gr.value(in[1]).transpose());
        }
        if (gr.requires_grad(in[1])) {
          gr.AccumulateGradExpr(in[1], gr.value(in[0]).transpose() * gy);
        }
        if (gr.requires_grad(in[2])) {
          gr.AccumulateGradExpr(in[2], gy.colwise().sum());
        }
      });
}

template <typename T>
Var Add(Graph<T> &g, Var a, Var b) {
  const Broadcast mode = CheckBinary(g.value(a), g.value(b), "add");
  return g.Emit(
      "add", {a.id, b.id},
      [mode](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        const auto &av = gr.value(in[0]);
        const auto &bv = gr.value(in[1]);
        auto &out = gr.mutable_value(id);
        switch (mode) {
          case Broadcast::kSame: out = av + bv; break;
          case Broadcast::kLeftScalar: out = (bv.array() + av(0, 0)).matrix(); break;
          case Broadcast::kRightScalar: out = (av.array() + bv(0, 0)).matrix(); break;
        }
      },
      [mode](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        const auto &gy = gr.grad(id);
        Matrix<T> total = Matrix<T>::Constant(1, 1, gy.sum());
        gr.AccumulateGrad(in[0], mode == Broadcast::kLeftScalar ? total : gy);
        gr.AccumulateGrad(in[1], mode == Broadcast::kRightScalar ? total : gy);
      });
}

template <typename T>
Var Sub(Graph<T> &g, Var a, Var b) {
  const Broadcast mode = CheckBinary(g.value(a), g.value(b), "sub");
  return g.Emit(
      "sub", {a.id, b.id},
      [mode](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        const auto &av = gr.value(in[0]);
        const auto &bv = gr.value(in[1]);
        auto &out = gr.mutable_value(id);
        switch (mode) {
          case Broadcast::kSame: out = av - bv; break;
          case Broadcast::kLeftScalar: out = (av(0, 0) - bv.array()).matrix(); break;
          case Broadcast::kRightScalar: out = (av.array() - bv(0, 0)).matrix(); break;
        }
      },
      [mode](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        const auto &gy = gr.grad(id);
        Matrix<T> total = Matrix<T>::Constant(1, 1, gy.sum());
        gr.AccumulateGrad(in[0], mode == Broadcast::kLeftScalar ? total : gy);
        if (mode == Broadcast::kRightScalar) {
          gr.AccumulateGradExpr(in[1], -total);
        } else {
          gr.AccumulateGradExpr(in[1], -gy);
        }
      });
}

template <typename T>
Var Mul(Graph<T> &g, Var a, Var b) {
  const Broadcast mode = CheckBinary(g.value(a), g.value(b), "mul");
  return g.Emit(
      "mul", {a.id, b.id},
      [mode](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        const auto &av = gr.value(in[0]);
        const auto &bv = gr.value(in[1]);
        auto &out = gr.mutable_value(id);
        switch (mode) {
          case Broadcast::kSame: out = av.cwiseProduct(bv); break;
          case Broadcast::kLeftScalar: out = av(0, 0) * bv; break;
          case Broadcast::kRightScalar: out = bv(0, 0) * av; break;
        }
      },
      [mode](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        const auto &gy = gr.grad(id);
        const auto &av = gr.value(in[0]);
        const auto &bv = gr.value(in[1]);
        switch (mode) {
          case Broadcast::kSame:
            if (gr.requires_grad(in[0])) gr.AccumulateGradExpr(in[0], gy.cwiseProduct(bv));
            if (gr.requires_grad(in[1])) gr.AccumulateGradExpr(in[1], gy.cwiseProduct(av));
            break;
          case Broadcast::kLeftScalar:
            gr.AccumulateGrad(in[0], Matrix<T>::Constant(1, 1, gy.cwiseProduct(bv).sum()));
            if (gr.requires_grad(in[1])) gr.AccumulateGradExpr(in[1], av(0, 0) * gy);
            break;
          case Broadcast::kRightScalar:
            if (gr.requires_grad(in[0])) gr.AccumulateGradExpr(in[0], bv(0, 0) * gy);
            gr.AccumulateGrad(in[1], Matrix<T>::Constant(1, 1, gy.cwiseProduct(av).sum()));
            break;
        }
      });
}

template <typename T>
Var Affine(Graph<T> &g, Var x, T scale, T shift) {
  return g.Emit(
      "affine", {x.id},
      [scale, shift](Graph<T> &gr, int id) {
        gr.mutable_value(id) =
            (scale * gr.value(gr.node(id).inputs[0]).array() + shift).matrix();
      },
      [scale](Graph<T> &gr, int id) {
        gr.AccumulateGradExpr(gr.node(id).inputs[0], scale * gr.grad(id));
      });
}

template <typename T>
Var Relu(Graph<T> &g, Var x) {
  return Unary<T>(
      g, "relu", x,
      [](const Matrix<T> &v) -> Matrix<T> { return v.cwiseMax(T(0)); },
      [](const Matrix<T> &v, const Matrix<T> &, const Matrix<T> &gy) -> Matrix<T> {
        return (v.array() > T(0)).select(gy, T(0));
      });
}

template <typename T>
Var Sigmoid(Graph<T> &g, Var x) {
  return Unary<T>(
      g, "sigmoid", x,
      [](const Matrix<T> &v) -> Matrix<T> {
        return (T(1) / (T(1) + (-v.array()).exp())).matrix();
      },
      [](const Matrix<T> &, const Matrix<T> &y, const Matrix<T> &gy) -> Matrix<T> {
        return (gy.array() * y.array() * (T(1) - y.array())).matrix();
      });
}

template <typename T>
Var Tanh(Graph<T> &g, Var x) {
  return Unary<T>(
      g, "tanh", x,
      [](const Matrix<T> &v) -> Matrix<T> { return v.array().tanh().matrix(); },
      [](const Matrix<T> &, const Matrix<T> &y, const Matrix<T> &gy) -> Matrix<T> {
        return (gy.array() * (T(1) - y.array().square())).matrix();
      });
}

template <typename T>
Var Exp(Graph<T> &g, Var x) {
  return Unary<T>(
      g, "exp", x,
      [](const Matrix<T> &v) -> Matrix<T> { return v.array().exp().matrix(); },
      [](const Matrix<T> &, const Matrix<T> &y, const Matrix<T> &gy) -> Matrix<T> {
        return gy.cwiseProduct(y);
      });
}

template <typename T>
Var Square(Graph<T> &g, Var x) {
  return Unary<T>(
      g, "square", x,
      [](const Matrix<T> &v) -> Matrix<T> { return v.array().square().matrix(); },
      [](const Matrix<T> &v, const Matrix<T> &, const Matrix<T> &gy) -> Matrix<T> {
        return (T(2) * gy.array() * v.array()).matrix();
      });
}

template <typename T>
Var PRelu(Graph<T> &g, Var x, Var slope) {
  if (g.value(slope).size() != 1) {
    throw DimensionError("prelu: slope must be 1x1");
  }
  return g.Emit(
      "prelu", {x.id, slope.id},
      [](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        const auto &xv = gr.value(in[0]);
        const T a = gr.value(in[1])(0, 0);
        gr.mutable_value(id) = (xv.array() > T(0)).select(xv, a * xv);
      },
      [](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        const auto &xv = gr.value(in[0]);
        const auto &gy = gr.grad(id);
        const T a = gr.value(in[1])(0, 0);
        auto positive = xv.array() > T(0);
        if (gr.requires_grad(in[0])) {
          gr.AccumulateGradExpr(in[0], positive.select(gy, a * gy));
        }
        if (gr.requires_grad(in[1])) {
          Matrix<T> contrib = positive.select(Matrix<T>::Zero(xv.rows(), xv.cols()),
                                              gy.cwiseProduct(xv));
          gr.AccumulateGrad(in[1], Matrix<T>::Constant(1, 1, contrib.sum()));
        }
      });
}

template <typename T>
Var Sum(Graph<T> &g, Var x) {
  return g.Emit(
      "sum", {x.id},
      [](Graph<T> &gr, int id) {
        gr.mutable_value(id) =
            Matrix<T>::Constant(1, 1, gr.value(gr.node(id).inputs[0]).sum());
      },
      [](Graph<T> &gr, int id) {
        const int in = gr.node(id).inputs[0];
        const auto &xv = gr.value(in);
        gr.AccumulateGradExpr(in, Matrix<T>::Constant(xv.rows(), xv.cols(),
                                                      gr.grad(id)(0, 0)));
      });
}

template <typename T>
Var Mean(Graph<T> &g, Var x) {
  const auto n = static_cast<T>(g.value(x).size());
  return Affine(g, Sum(g, x), T(1) / n, T(0));
}

template <typename T>
Var ConcatCols(Graph<T> &g, std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  std::vector<int> ids;
  const auto rows = g.value(parts[0]).rows();
  for (Var p : parts) {
    if (g.value(p).rows() != rows) {
      throw DimensionError("concat: row counts differ");
    }
    ids.push_back(p.id);
  }
  return g.Emit(
      "concat", std::move(ids),
      [](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        Eigen::Index cols = 0;
        for (int i : in) cols += gr.value(i).cols();
        Matrix<T> out(gr.value(in[0]).rows(), cols);
        Eigen::Index off = 0;
        for (int i : in) {
          const auto &v = gr.value(i);
          out.middleCols(off, v.cols()) = v;
          off += v.cols();
        }
        gr.mutable_value(id) = std::move(out);
      },
      [](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        const auto &gy = gr.grad(id);
        Eigen::Index off = 0;
        for (int i : in) {
          const auto c = gr.value(i).cols();
          if (gr.requires_grad(i)) gr.AccumulateGradExpr(i, gy.middleCols(off, c));
          off += c;
        }
      });
}

template <typename T>
Var GatherRows(Graph<T> &g, Var x, std::vector<int> index) {
  const auto rows = g.value(x).rows();
  for (int i : index) {
    if (i < 0 || i >= rows) throw DimensionError("gather: row index out of range");
  }
  auto idx = std::make_shared<const std::vector<int>>(std::move(index));
  return g.Emit(
      "gather_rows", {x.id},
      [idx](Graph<T> &gr, int id) {
        const auto &xv = gr.value(gr.node(id).inputs[0]);
        Matrix<T> out(static_cast<Eigen::Index>(idx->size()), xv.cols());
        for (std::size_t i = 0; i < idx->size(); ++i) out.row(i) = xv.row((*idx)[i]);
        gr.mutable_value(id) = std::move(out);
      },
      [idx](Graph<T> &gr, int id) {
        const int in = gr.node(id).inputs[0];
        if (!gr.requires_grad(in)) return;
        const auto &xv = gr.value(in);
        const auto &gy = gr.grad(id);
        Matrix<T> dx = Matrix<T>::Zero(xv.rows(), xv.cols());
        for (std::size_t i = 0; i < idx->size(); ++i) dx.row((*idx)[i]) += gy.row(i);
        gr.AccumulateGrad(in, dx);
      });
}

template <typename T>
Var ScatterAddRows(Graph<T> &g, Var x, std::vector<int> index, int rows) {
  if (static_cast<Eigen::Index>(index.size()) != g.value(x).rows()) {
    throw DimensionError("scatter: index length differs from row count");
  }
  for (int i : index) {
    if (i < 0 || i >= rows) throw DimensionError("scatter: row index out of range");
  }
  auto idx = std::make_shared<const std::vector<int>>(std::move(index));
  return g.Emit(
      "scatter_add_rows", {x.id},
      [idx, rows](Graph<T> &gr, int id) {
        const auto &xv = gr.value(gr.node(id).inputs[0]);
        Matrix<T> out = Matrix<T>::Zero(rows, xv.cols());
        for (std::size_t i = 0; i < idx->size(); ++i) out.row((*idx)[i]) += xv.row(i);
        gr.mutable_value(id) = std::move(out);
      },
      [idx](Graph<T> &gr, int id) {
        const int in = gr.node(id).inputs[0];
        if (!gr.requires_grad(in)) return;
        const auto &gy = gr.grad(id);
        Matrix<T> dx(static_cast<Eigen::Index>(idx->size()), gy.cols());
        for (std::size_t i = 0; i < idx->size(); ++i) dx.row(i) = gy.row((*idx)[i]);
        gr.AccumulateGrad(in, dx);
      });
}

template <typename T>
Var RowScale(Graph<T> &g, Var x, std::vector<T> scale) {
  if (static_cast<Eigen::Index>(scale.size()) != g.value(x).rows()) {
    throw DimensionError("row_scale: scale length differs from row count");
  }
  auto s = std::make_shared<const Eigen::Array<T, Eigen::Dynamic, 1>>(
      Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>>(
          scale.data(), static_cast<Eigen::Index>(scale.size())));
  return g.Emit(
      "row_scale", {x.id},
      [s](Graph<T> &gr, int id) {
        const auto &xv = gr.value(gr.node(id).inputs[0]);
        gr.mutable_value(id) = (xv.array().colwise() * (*s)).matrix();
      },
      [s](Graph<T> &gr, int id) {
        const auto &gy = gr.grad(id);
        gr.AccumulateGradExpr(gr.node(id).inputs[0],
                              (gy.array().colwise() * (*s)).matrix());
      });
}

template <typename T>
Var BatchNorm(Graph<T> &g, Var x, Var gamma, Var beta,
              BatchNormState<T> &state, bool train) {
  const auto &xv = g.value(x);
  const auto features = xv.cols();
  if (g.value(gamma).cols() != features || g.value(beta).cols() != features ||
      state.running_mean.cols() != features) {
    throw DimensionError("batchnorm: feature width mismatch");
  }
  const T eps = state.eps;
  if (!train) {
    Matrix<T> inv_std =
        (state.running_var.array() + eps).rsqrt().matrix();
    Matrix<T> mean = state.running_mean;
    return g.Emit(
        "batchnorm_eval", {x.id, gamma.id, beta.id},
        [inv_std, mean](Graph<T> &gr, int id) {
          const auto &in = gr.node(id).inputs;
          const auto &xin = gr.value(in[0]);
          Matrix<T> xhat = ((xin.rowwise() - mean.row(0)).array().rowwise() *
                            inv_std.row(0).array())
                               .matrix();
          gr.mutable_value(id) =
              ((xhat.array().rowwise() * gr.value(in[1]).row(0).array())
                   .rowwise() +
               gr.value(in[2]).row(0).array())
                  .matrix();
        },
        [inv_std, mean](Graph<T> &gr, int id) {
          const auto &in = gr.node(id).inputs;
          const auto &xin = gr.value(in[0]);
          const auto &gy = gr.grad(id);
          Matrix<T> xhat = ((xin.rowwise() - mean.row(0)).array().rowwise() *
                            inv_std.row(0).array())
                               .matrix();
          if (gr.requires_grad(in[0])) {
            gr.AccumulateGradExpr(
                in[0], (gy.array().rowwise() *
                        (gr.value(in[1]).row(0).array() * inv_std.row(0).array()))
                           .matrix());
          }
          if (gr.requires_grad(in[1])) {
            gr.AccumulateGradExpr(in[1], gy.cwiseProduct(xhat).colwise().sum());
          }
          if (gr.requires_grad(in[2])) {
            gr.AccumulateGradExpr(in[2], gy.colwise().sum());
          }
        });
  }
  if (xv.rows() < 2) {
    throw DomainError("batchnorm: training mode needs a batch of at least 2");
  }
  Var out = g.Emit(
      "batchnorm_train", {x.id, gamma.id, beta.id},
      [eps](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        const auto &xin = gr.value(in[0]);
        const T n = static_cast<T>(xin.rows());
        Matrix<T> mean = xin.colwise().sum() / n;
        Matrix<T> centered = xin.rowwise() - mean.row(0);
        Matrix<T> var = centered.array().square().colwise().sum().matrix() / n;
        Matrix<T> inv_std = (var.array() + eps).rsqrt().matrix();
        Matrix<T> xhat =
            (centered.array().rowwise() * inv_std.row(0).array()).matrix();
        gr.mutable_value(id) =
            ((xhat.array().rowwise() * gr.value(in[1]).row(0).array())
                 .rowwise() +
             gr.value(in[2]).row(0).array())
                .matrix();
      },
      [eps](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        const auto &xin = gr.value(in[0]);
        const auto &gy = gr.grad(id);
        const T n = static_cast<T>(xin.rows());
        Matrix<T> mean = xin.colwise().sum() / n;
        Matrix<T> centered = xin.rowwise() - mean.row(0);
        Matrix<T> var = centered.array().square().colwise().sum().matrix() / n;
        Matrix<T> inv_std = (var.array() + eps).rsqrt().matrix();
        Matrix<T> xhat =
            (centered.array().rowwise() * inv_std.row(0).array()).matrix();
        if (gr.requires_grad(in[1])) {
          gr.AccumulateGradExpr(in[1], gy.cwiseProduct(xhat).colwise().sum());
        }
        if (gr.requires_grad(in[2])) {
          gr.AccumulateGradExpr(in[2], gy.colwise().sum());
        }
        if (gr.requires_grad(in[0])) {
          Matrix<T> dxhat =
              (gy.array().rowwise() * gr.value(in[1]).row(0).array()).matrix();
          Matrix<T> sum_dxhat = dxhat.colwise().sum();
          Matrix<T> sum_dxhat_xhat = dxhat.cwiseProduct(xhat).colwise().sum();
          Matrix<T> dx =
              ((((dxhat * n).rowwise() - sum_dxhat.row(0)).array() -
                xhat.array().rowwise() * sum_dxhat_xhat.row(0).array())
                   .rowwise() *
               (inv_std.row(0).array() / n))
                  .matrix();
          gr.AccumulateGrad(in[0], dx);
        }
      });
  // Running statistics are updated once, here, not by Recompute().
  const T n = static_cast<T>(xv.rows());
  Matrix<T> mean = xv.colwise().sum() / n;
  Matrix<T> var = (xv.rowwise() - mean.row(0)).array().square().colwise().sum().matrix() /
                  (n - T(1));
  state.running_mean = (T(1) - state.momentum) * state.running_mean + state.momentum * mean;
  state.running_var = (T(1) - state.momentum) * state.running_var + state.momentum * var;
  return out;
}

template <typename T>
Var BceWithLogits(Graph<T> &g, Var logits, Matrix<T> target) {
  const auto &lv = g.value(logits);
  if (lv.rows() != target.rows() || lv.cols() != target.cols()) {
    throw DimensionError("bce: target shape differs from logits");
  }
  if ((target.array() < T(0)).any() || (target.array() > T(1)).any() ||
      !target.allFinite()) {
    throw DomainError("bce: target values must lie in [0, 1]");
  }
  auto t = std::make_shared<const Matrix<T>>(std::move(target));
  return g.Emit(
      "bce_with_logits", {logits.id},
      [t](Graph<T> &gr, int id) {
        const auto &l = gr.value(gr.node(id).inputs[0]).array();
        auto softplus = l.max(T(0)) + (-l.abs()).exp().log1p();
        const T total = (softplus - t->array() * l).sum();
        gr.mutable_value(id) =
            Matrix<T>::Constant(1, 1, total / static_cast<T>(t->rows()));
      },
      [t](Graph<T> &gr, int id) {
        const int in = gr.node(id).inputs[0];
        const auto &l = gr.value(in).array();
        const T scale = gr.grad(id)(0, 0) / static_cast<T>(t->rows());
        Matrix<T> sig = (T(1) / (T(1) + (-l).exp())).matrix();
        gr.AccumulateGradExpr(in, scale * (sig - *t));
      });
}

template <typename T>
Var KlStdNormal(Graph<T> &g, Var mu, Var logvar) {
  const auto &m = g.value(mu);
  const auto &lv = g.value(logvar);
  if (m.rows() != lv.rows() || m.cols() != lv.cols()) {
    throw DimensionError("kl: mean and log-variance shapes differ");
  }
  return g.Emit(
      "kl_std_normal", {mu.id, logvar.id},
      [](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        const auto &mv = gr.value(in[0]).array();
        const auto &l = gr.value(in[1]).array();
        const T total = (T(-0.5) * (T(1) + l - mv.square() - l.exp())).sum();
        gr.mutable_value(id) = Matrix<T>::Constant(
            1, 1, total / static_cast<T>(gr.value(in[0]).rows()));
      },
      [](Graph<T> &gr, int id) {
        const auto &in = gr.node(id).inputs;
        const T scale = gr.grad(id)(0, 0) / static_cast<T>(gr.value(in[0]).rows());
        if (gr.requires_grad(in[0])) {
          gr.AccumulateGradExpr(in[0], scale * gr.value(in[0]));
        }
        if (gr.requires_grad(in[1])) {
          gr.AccumulateGradExpr(
              in[1], (scale * T(0.5) * (gr.value(in[1]).array().exp() - T(1))).matrix());
        }
      });
}

template <typename T>
Var Mse(Graph<T> &g, Var pred, Matrix<T> target) {
  const auto &pv = g.value(pred);
  if (pv.rows() != target.rows() || pv.cols() != target.cols()) {
    throw DimensionError("mse: target shape differs from prediction");
  }
  auto t = std::make_shared<const Matrix<T>>(std::move(target));
  return g.Emit(
      "mse", {pred.id},
      [t](Graph<T> &gr, int id) {
        const auto &p = gr.value(gr.node(id).inputs[0]);
        gr.mutable_value(id) = Matrix<T>::Constant(
            1, 1, (p - *t).squaredNorm() / static_cast<T>(t->size()));
      },
      [t](Graph<T> &gr, int id) {
        const int in = gr.node(id).inputs[0];
        const T scale = T(2) * gr.grad(id)(0, 0) / static_cast<T>(t->size());
        gr.AccumulateGradExpr(in, scale * (gr.value(in) - *t));
      });
}

template <typename T>
Var Reparameterize(Graph<T> &g, Var mu, Var logvar, Matrix<T> eps) {
  Var std_dev = Exp(g, Affine(g, logvar, T(0.5), T(0)));
  return Add(g, mu, Mul(g, std_dev, g.Constant(std::move(eps))));
}

#define DRP_INSTANTIATE_OPS(T)                                               \
  template Var MatMul<T>(Graph<T> &, Var, Var);                              \
  template Var Linear<T>(Graph<T> &, Var, Var, Var);                         \
  template Var Add<T>(Graph<T> &, Var, Var);                                 \
  template Var Sub<T>(Graph<T> &, Var, Var);                                 \
  template Var Mul<T>(Graph<T> &, Var, Var);                                 \
  template Var Affine<T>(Graph<T> &, Var, T, T);                             \
  template Var Relu<T>(Graph<T> &, Var);                                     \
  template Var Sigmoid<T>(Graph<T> &, Var);                                  \
  template Var Tanh<T>(Graph<T> &, Var);                                     \
  template Var Exp<T>(Graph<T> &, Var);                                      \
  template Var Square<T>(Graph<T> &, Var);                                   \
  template Var PRelu<T>(Graph<T> &, Var, Var);                               \
  template Var Sum<T>(Graph<T> &, Var);                                      \
  template Var Mean<T>(Graph<T> &, Var);                                     \
  template Var ConcatCols<T>(Graph<T> &, std::span<const Var>);              \
  template Var GatherRows<T>(Graph<T> &, Var, std::vector<int>);             \
  template Var ScatterAddRows<T>(Graph<T> &, Var, std::vector<int>, int);    \
  template Var RowScale<T>(Graph<T> &, Var, std::vector<T>);                 \
  template Var BatchNorm<T>(Graph<T> &, Var, Var, Var, BatchNormState<T> &,  \
                            bool);                                           \
  template Var BceWithLogits<T>(Graph<T> &, Var, Matrix<T>);                 \
  template Var KlStdNormal<T>(Graph<T> &, Var, Var);                         \
  template Var Mse<T>(Graph<T> &, Var, Matrix<T>);                           \
  template Var Reparameterize<T>(Graph<T> &, Var, Var, Matrix<T>);

DRP_INSTANTIATE_OPS(float)
DRP_INSTANTIATE_OPS(double)

}  // namespace drp::ad
