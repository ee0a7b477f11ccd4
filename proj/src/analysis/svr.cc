//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/analysis/svr.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "drp/common/error.h"

namespace drp::analysis {
namespace {

constexpr double kTau = 1e-12;

std::span<const double> Row(const Eigen::MatrixXd &m, Eigen::Index i, std::vector<double> &buf) {
  buf.resize(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) buf[static_cast<std::size_t>(j)] = m(i, j);
  return buf;
}

}  // namespace

double PolyKernel(const SvrConfig &config, std::span<const double> a, std::span<const double> b) {
  double dot = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
  return std::pow(config.gamma * dot + config.coef0, config.degree);
}

double SvrModel::Predict(std::span<const double> x) const {
  if (support.rows() > 0 && static_cast<Eigen::Index>(x.size()) != support.cols()) {
    throw DimensionError("SVR input width mismatch");
  }
  double f = bias;
  std::vector<double> buf;
  for (Eigen::Index i = 0; i < support.rows(); ++i) {
    f += coefficients[i] * PolyKernel(config, Row(support, i, buf), x);
  }
  return f;
}

Eigen::VectorXd SvrModel::Predict(const Eigen::MatrixXd &x) const {
  Eigen::VectorXd out(x.rows());
  std::vector<double> buf;
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = Predict(Row(x, i, buf));
  return out;
}

SvrModel SvrFit(const Eigen::MatrixXd &features, const Eigen::VectorXd &targets,
                const SvrConfig &config) {
  const Eigen::Index n = features.rows();
  if (n < 2) throw DomainError("SVR needs at least 2 training points");
  if (targets.size() != n) throw DimensionError("SVR targets do not match feature rows");
  if (!(config.c > 0.0) || config.epsilon < 0.0 || config.degree < 1) {
    throw DomainError("SVR needs C > 0, epsilon >= 0 and degree >= 1");
  }

  // Gram matrix via one matrix product, then the elementwise polynomial.
  Eigen::MatrixXd k = features * features.transpose();
  k = (config.gamma * k.array() + config.coef0).pow(config.degree).matrix();

  // Variables t < n are alpha_i (sign +1), t >= n are alpha*_i (sign -1).
  const Eigen::Index m = 2 * n;
  auto src = [n](Eigen::Index t) { return t < n ? t : t - n; };
  auto sign = [n](Eigen::Index t) { return t < n ? 1.0 : -1.0; };
  const double c = config.c;
  std::vector<double> alpha(static_cast<std::size_t>(m), 0.0);
  std::vector<double> grad(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < n; ++i) {
    grad[static_cast<std::size_t>(i)] = config.epsilon - targets[i];
    grad[static_cast<std::size_t>(i + n)] = config.epsilon + targets[i];
  }
  auto is_up = [&](Eigen::Index t) {
    const double a = alpha[static_cast<std::size_t>(t)];
    return sign(t) > 0 ? a < c : a > 0.0;
  };
  auto is_low = [&](Eigen::Index t) {
    const double a = alpha[static_cast<std::size_t>(t)];
    return sign(t) > 0 ? a > 0.0 : a < c;
  };

  SvrModel model;
  model.config = config;
  double violation = std::numeric_limits<double>::infinity();
  std::int64_t iter = 0;
  for (; iter < config.max_iterations; ++iter) {
    Eigen::Index i = -1;
    Eigen::Index j = -1;
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < m; ++t) {
      const double v = -sign(t) * grad[static_cast<std::size_t>(t)];
      if (is_up(t) && v > g_max) {
        g_max = v;
        i = t;
      }
      if (is_low(t) && v < g_min) {
        g_min = v;
        j = t;
      }
    }
    violation = g_max - g_min;
    if (i < 0 || j < 0 || violation < config.tolerance) break;

    const double yi = sign(i);
    const double yj = sign(j);
    const Eigen::Index si = src(i);
    const Eigen::Index sj = src(j);
    double &ai = alpha[static_cast<std::size_t>(i)];
    double &aj = alpha[static_cast<std::size_t>(j)];
    const double gi = grad[static_cast<std::size_t>(i)];
    const double gj = grad[static_cast<std::size_t>(j)];
    const double old_ai = ai;
    const double old_aj = aj;
    double quad = k(si, si) + k(sj, sj) - 2.0 * k(si, sj);
    if (quad <= 0.0) quad = kTau;
    if (yi != yj) {
      const double delta = (-gi - gj) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) {
          aj = 0.0;
          ai = diff;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = -diff;
      }
      if (diff > 0.0) {
        if (ai > c) {
          ai = c;
          aj = c - diff;
        }
      } else if (aj > c) {
        aj = c;
        ai = c + diff;
      }
    } else {
      const double delta = (gi - gj) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c) {
        if (ai > c) {
          ai = c;
          aj = sum - c;
        }
      } else if (aj < 0.0) {
        aj = 0.0;
        ai = sum;
      }
      if (sum > c) {
        if (aj > c) {
          aj = c;
          ai = sum - c;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = sum;
      }
    }
    const double dai = ai - old_ai;
    const double daj = aj - old_aj;
    for (Eigen::Index t = 0; t < m; ++t) {
      const Eigen::Index st = src(t);
      grad[static_cast<std::size_t>(t)] +=
          sign(t) * (yi * k(st, si) * dai + yj * k(st, sj) * daj);
    }
  }
  model.iterations = iter;
  model.final_violation = violation;
  model.converged = violation < config.tolerance;
  if (!model.converged) {
    model.warning = "SVR solver stopped after " + std::to_string(iter) +
                    " iterations with KKT violation " + std::to_string(violation);
  }

  // rho from free variables, else the midpoint of the feasible interval.
  double free_sum = 0.0;
  int free_count = 0;
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < m; ++t) {
    const double yg = sign(t) * grad[static_cast<std::size_t>(t)];
    const double a = alpha[static_cast<std::size_t>(t)];
    if (a >= c) {
      if (sign(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (a <= 0.0) {
      if (sign(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count > 0 ? free_sum / free_count : 0.5 * (ub + lb);
  model.bias = -rho;

  model.all_coefficients.resize(n);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double coef =
        alpha[static_cast<std::size_t>(i)] - alpha[static_cast<std::size_t>(i + n)];
    model.all_coefficients[i] = coef;
    if (coef != 0.0) kept.push_back(i);
  }
  model.support.resize(static_cast<Eigen::Index>(kept.size()), features.cols());
  model.coefficients.resize(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t r = 0; r < kept.size(); ++r) {
    model.support.row(static_cast<Eigen::Index>(r)) = features.row(kept[r]);
    model.coefficients[static_cast<Eigen::Index>(r)] = model.all_coefficients[kept[r]];
  }
  return model;
}

double KktViolation(const SvrModel &model, const Eigen::MatrixXd &features,
                    const Eigen::VectorXd &targets) {
  const double eps = model.config.epsilon;
  const double c = model.config.c;
  const Eigen::VectorXd f = model.Predict(features);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const double r = targets[i] - f[i];
    const double coef = model.all_coefficients[i];
    double v = 0.0;
    if (coef > 0.0) {
      v = std::max(0.0, eps - r);
      if (coef < c) v = std::max(v, r - eps);
    } else if (coef < 0.0) {
      v = std::max(0.0, r + eps);
      if (coef > -c) v = std::max(v, -eps - r);
    } else {
      v = std::max(0.0, std::abs(r) - eps);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace drp::analysis
