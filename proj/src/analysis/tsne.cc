//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/analysis/tsne.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drp/common/csv.h"
#include "drp/common/error.h"
#include "drp/common/rng.h"

namespace drp::analysis {
namespace {

constexpr double kDistanceFloor = 1e-12;

Eigen::MatrixXd SquaredDistances(const Eigen::MatrixXd &x) {
  const Eigen::VectorXd norms = x.rowwise().squaredNorm();
  Eigen::MatrixXd d = (-2.0 * x * x.transpose()).colwise() + norms;
  d.rowwise() += norms.transpose();
  d = d.cwiseMax(kDistanceFloor);
  return d;
}

double Kl(const Eigen::MatrixXd &p, const Eigen::MatrixXd &q) {
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = p.data()[i];
    if (pi > 0.0) kl += pi * std::log(pi / std::max(q.data()[i], 1e-300));
  }
  return kl;
}

}  // namespace

double EffectivePerplexity(int n, const TsneConfig &config) {
  if (config.perplexity > 0.0) return config.perplexity;
  return std::max(5.0, n / 120.0);
}

double ConditionalAffinities(const Eigen::VectorXd &sq_dist, double perplexity, double tolerance,
                             int max_steps, Eigen::VectorXd &p) {
  const double target = std::log(perplexity);
  // Shift by the smallest distance so the exponentials never all underflow.
  double d_min = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < sq_dist.size(); ++j) d_min = std::min(d_min, sq_dist[j]);
  double beta = 1.0;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double entropy = 0.0;
  p.resize(sq_dist.size());
  for (int step = 0; step < max_steps; ++step) {
    double sum = 0.0;
    double weighted = 0.0;
    for (Eigen::Index j = 0; j < sq_dist.size(); ++j) {
      if (std::isinf(sq_dist[j])) {
        p[j] = 0.0;
        continue;
      }
      const double shifted = sq_dist[j] - d_min;
      p[j] = std::exp(-beta * shifted);
      sum += p[j];
      weighted += p[j] * shifted;
    }
    entropy = std::log(sum) + beta * weighted / sum;
    p /= sum;
    const double diff = entropy - target;
    if (std::abs(diff) < tolerance) break;
    if (diff > 0.0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
    } else {
      hi = beta;
      beta = 0.5 * (beta + lo);
    }
  }
  return entropy;
}

TsneResult Tsne(const Eigen::MatrixXd &points, const TsneConfig &config) {
  const int n = static_cast<int>(points.rows());
  if (n < 5) throw DomainError("t-SNE needs at least 5 points");
  if (config.iterations < 250) throw DomainError("t-SNE needs at least 250 iterations");
  TsneResult result;
  result.perplexity = EffectivePerplexity(n, config);
  if (!(result.perplexity > 1.0 && result.perplexity < n)) {
    throw DomainError("perplexity must lie strictly between 1 and n");
  }

  // Bandwidth search per row, then symmetrization.
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      d(i, j) = std::max(kDistanceFloor, (points.row(i) - points.row(j)).squaredNorm());
    }
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd row(n);
  Eigen::VectorXd cond;
  // Scale distances by their mean so beta = 1 is a sensible start.
  const double scale = d.sum() / (static_cast<double>(n) * (n - 1));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      row[j] = i == j ? std::numeric_limits<double>::infinity() : d(i, j) / scale;
    }
    const double h = ConditionalAffinities(row, result.perplexity, config.entropy_tolerance,
                                           config.max_search_steps, cond);
    result.entropy_error.push_back(h - std::log(result.perplexity));
    p.row(i) = cond.transpose();
  }
  p = (p + p.transpose()) / (2.0 * n);
  // Snapping P to a 1e-12 grid removes input roundoff (for example from a
  // rotation of the points) before it can be amplified by the optimizer.
  p = (p.array() * 1e12).round().matrix() / 1e12;
  p = p.cwiseMax(1e-12);
  p.diagonal().setZero();

  Rng rng(config.seed);
  Eigen::MatrixXd y(n, 2);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.Normal(0.0, 1e-4);
  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, 2);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
  Eigen::MatrixXd q(n, n);
  Eigen::MatrixXd num(n, n);
  Eigen::MatrixXd grad(n, 2);

  for (int it = 0; it < config.iterations; ++it) {
    const bool exaggerate = it < config.exaggeration_iterations;
    const double momentum = it < config.momentum_switch ? 0.5 : 0.8;
    const Eigen::MatrixXd dy = SquaredDistances(y);
    num = (1.0 + dy.array()).inverse().matrix();
    num.diagonal().setZero();
    const double z = num.sum();
    q = num / z;
    const double factor = exaggerate ? config.exaggeration : 1.0;
    const Eigen::MatrixXd w = ((factor * p - q).array() * num.array()).matrix();
    // grad_i = 4 sum_j w_ij (y_i - y_j)
    grad = 4.0 * (w.rowwise().sum().asDiagonal() * y - w * y);
    for (Eigen::Index k = 0; k < grad.size(); ++k) {
      double &gain = gains.data()[k];
      const bool same_sign = (grad.data()[k] > 0.0) == (velocity.data()[k] > 0.0);
      gain = same_sign ? std::max(0.01, gain * 0.8) : gain + 0.2;
    }
    velocity = momentum * velocity - config.learning_rate * gains.cwiseProduct(grad);
    y += velocity;
    y.rowwise() -= y.colwise().mean();
    // KL of the updated embedding against the true P.
    const Eigen::MatrixXd dy2 = SquaredDistances(y);
    Eigen::MatrixXd num2 = (1.0 + dy2.array()).inverse().matrix();
    num2.diagonal().setZero();
    result.kl.push_back(Kl(p, num2 / num2.sum()));
  }
  result.embedding = y;
  return result;
}

double ProcrustesResidual(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
  const Eigen::MatrixXd ac = a.rowwise() - a.colwise().mean();
  const Eigen::MatrixXd bc = b.rowwise() - b.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(bc.transpose() * ac, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd r = svd.matrixU() * svd.matrixV().transpose();
  return (bc * r - ac).norm() / ac.norm();
}

double NearestNeighborPurity(const Eigen::MatrixXd &points, const std::vector<int> &labels) {
  const Eigen::MatrixXd d = SquaredDistances(points);
  int same = 0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < points.rows(); ++j) {
      if (j != i && (best < 0 || d(i, j) < d(i, best))) best = j;
    }
    same += labels[i] == labels[best] ? 1 : 0;
  }
  return static_cast<double>(same) / static_cast<double>(points.rows());
}

std::string FormatEmbeddingCsv(const Eigen::MatrixXd &embedding,
                               const std::vector<std::string> &labels) {
  std::string out = "x,y,label\n";
  for (Eigen::Index i = 0; i < embedding.rows(); ++i) {
    out += FormatDouble(embedding(i, 0)) + "," + FormatDouble(embedding(i, 1)) + "," +
           CsvField(labels[i]) + "\n";
  }
  return out;
}

}  // namespace drp::analysis
