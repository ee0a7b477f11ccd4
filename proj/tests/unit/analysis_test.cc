//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "drp/analysis/metrics.h"
#include "drp/analysis/svr.h"
#include "drp/analysis/tissue.h"
#include "drp/analysis/tsne.h"
#include "drp/common/rng.h"

namespace drp::analysis {
namespace {

TEST(Metrics, HandComputedCase) {
  const std::vector<double> pred{1.0, 2.0};
  const std::vector<double> truth{2.0, 4.0};
  const MetricReport r = R2Rmse(pred, truth, "hand");
  EXPECT_NEAR(r.rmse, std::sqrt(2.5), 1e-12);
  EXPECT_NEAR(r.r2, -1.5, 1e-12);
  EXPECT_EQ(r.count, 2u);
  EXPECT_EQ(r.label, "hand");
}

TEST(Metrics, PerfectAndMeanPredictors) {
  const std::vector<double> truth{0.5, -1.0, 3.0, 2.25};
  const MetricReport perfect = R2Rmse(truth, truth);
  EXPECT_EQ(perfect.r2, 1.0);
  EXPECT_EQ(perfect.rmse, 0.0);
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / 4.0;
  const std::vector<double> flat(4, mean);
  EXPECT_NEAR(R2Rmse(flat, truth).r2, 0.0, 1e-12);
}

TEST(Metrics, InvariantToPairOrder) {
  Rng rng(5);
  std::vector<double> pred(50);
  std::vector<double> truth(50);
  for (int i = 0; i < 50; ++i) {
    truth[i] = rng.Normal();
    pred[i] = truth[i] + rng.Normal(0.0, 0.3);
  }
  const MetricReport a = R2Rmse(pred, truth);
  std::vector<int> perm(50);
  std::iota(perm.begin(), perm.end(), 0);
  rng.Shuffle(perm.begin(), perm.end());
  std::vector<double> p2;
  std::vector<double> t2;
  for (int i : perm) {
    p2.push_back(pred[i]);
    t2.push_back(truth[i]);
  }
  const MetricReport b = R2Rmse(p2, t2);
  EXPECT_NEAR(a.r2, b.r2, 1e-12);
  EXPECT_NEAR(a.rmse, b.rmse, 1e-12);
  EXPECT_LE(a.r2, 1.0);
  EXPECT_GE(a.rmse, 0.0);
}

TEST(Metrics, ConstantTruthKeepsRmse) {
  const std::vector<double> pred{1.0, 3.0};
  const std::vector<double> truth{2.0, 2.0};
  try {
    R2Rmse(pred, truth);
    FAIL() << "expected R2Undefined";
  } catch (const R2Undefined &e) {
    EXPECT_NEAR(e.report().rmse, 1.0, 1e-12);
  }
  EXPECT_THROW(R2Rmse(std::vector<double>{}, std::vector<double>{}), DimensionError);
  EXPECT_THROW(R2Rmse(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), DimensionError);
}

TEST(Metrics, LatentDistance) {
  const std::vector<double> a{1.0, 0.0, 0.0};
  const std::vector<double> b{0.0, 1.0, 0.0};
  EXPECT_EQ(LatentDistance(a, a), 0.0);
  EXPECT_NEAR(LatentDistance(a, b), std::sqrt(2.0), 1e-15);
  EXPECT_THROW(LatentDistance(a, std::vector<double>{1.0}), DimensionError);
}

data::ExpressionMatrix TissueMatrix(int a, int b) {
  data::ExpressionMatrix m;
  m.genes = {"G1"};
  m.values = Eigen::MatrixXd::Zero(1, a + b);
  for (int i = 0; i < a + b; ++i) {
    const std::string tissue = i < a ? "BREAST" : "LUNG";
    m.cell_lines.push_back("L" + std::to_string(i) + "_" + tissue);
    m.tissues.push_back(tissue);
    m.values(0, i) = i;
  }
  return m;
}

TEST(Tissue, ThresholdBoundary) {
  const auto kept = TissueThresholdFilter(TissueMatrix(30, 29));
  EXPECT_EQ(kept.num_lines(), 30u);
  const auto counts = TissueCounts(kept);
  EXPECT_EQ(counts.size(), 1u);
  EXPECT_EQ(counts.at("BREAST"), 30);
  // Kept lines keep their values and order.
  for (int i = 0; i < 30; ++i) EXPECT_EQ(kept.values(0, i), i);
  EXPECT_THROW(TissueThresholdFilter(TissueMatrix(29, 29)), DataError);
}

TEST(Tissue, NeverIncreasesCounts) {
  const auto m = TissueMatrix(40, 12);
  const auto before = TissueCounts(m);
  const auto after = TissueCounts(TissueThresholdFilter(m, 10));
  for (const auto &[t, c] : after) EXPECT_EQ(c, before.at(t));
}

Eigen::MatrixXd Clusters(int n, int d, std::vector<int> &labels, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd centers(3, d);
  for (Eigen::Index i = 0; i < centers.size(); ++i) centers.data()[i] = rng.Normal(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  labels.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    labels[static_cast<std::size_t>(i)] = i % 3;
    for (int j = 0; j < d; ++j) x(i, j) = centers(i % 3, j) + rng.Normal(0.0, 0.3);
  }
  return x;
}

TEST(Tsne, PerplexityDefaultsAndValidation) {
  EXPECT_EQ(EffectivePerplexity(120, {}), 5.0);
  EXPECT_EQ(EffectivePerplexity(1200, {}), 10.0);
  TsneConfig c;
  c.perplexity = 30.0;
  EXPECT_EQ(EffectivePerplexity(10, c), 30.0);
  EXPECT_THROW(Tsne(Eigen::MatrixXd::Zero(10, 2), c), DomainError);
  EXPECT_THROW(Tsne(Eigen::MatrixXd::Zero(4, 2)), DomainError);
  TsneConfig short_run;
  short_run.iterations = 100;
  EXPECT_THROW(Tsne(Eigen::MatrixXd::Random(20, 2), short_run), DomainError);
}

TEST(Tsne, BandwidthSearchHitsTarget) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd d(40);
    for (Eigen::Index j = 0; j < d.size(); ++j) d[j] = std::pow(rng.Uniform(0.0, 3.0), 2);
    d[trial] = std::numeric_limits<double>::infinity();
    Eigen::VectorXd p;
    const double perplexity = 2.0 + trial;
    const double h = ConditionalAffinities(d, perplexity, 1e-5, 50, p);
    EXPECT_LT(std::abs(h - std::log(perplexity)), 1e-4);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_EQ(p[trial], 0.0);
  }
}

TEST(Tsne, SeparatesClusters) {
  std::vector<int> labels;
  const Eigen::MatrixXd x = Clusters(120, 256, labels, 11);
  TsneConfig c;
  c.seed = 3;
  const TsneResult r = Tsne(x, c);
  ASSERT_EQ(r.embedding.rows(), 120);
  ASSERT_EQ(r.embedding.cols(), 2);
  EXPECT_GE(NearestNeighborPurity(r.embedding, labels), 0.9);
  for (double e : r.entropy_error) EXPECT_LT(std::abs(e), 1e-4);
  ASSERT_EQ(r.kl.size(), 3000u);
  EXPECT_LT(r.kl[2999], r.kl[299]);
}

TEST(Tsne, DuplicatePointsAreFinite) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(12, 3);
  x.bottomRows(6).setOnes();
  TsneConfig c;
  c.iterations = 300;
  const TsneResult r = Tsne(x, c);
  EXPECT_TRUE(r.embedding.allFinite());
}

TEST(Tsne, RotationInvariant) {
  std::vector<int> labels;
  const Eigen::MatrixXd x = Clusters(60, 8, labels, 4);
  Rng rng(9);
  Eigen::MatrixXd a(8, 8);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.Normal();
  const Eigen::MatrixXd rot = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
  TsneConfig c;
  c.iterations = 500;
  c.seed = 1;
  const TsneResult r1 = Tsne(x, c);
  const TsneResult r2 = Tsne(x * rot, c);
  EXPECT_LT(ProcrustesResidual(r1.embedding, r2.embedding), 1e-3);
}

TEST(Tsne, ProcrustesIgnoresRigidMotion) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(30, 2);
  Eigen::Matrix2d rot;
  rot << std::cos(0.7), -std::sin(0.7), std::sin(0.7), std::cos(0.7);
  Eigen::MatrixXd b = a * rot;
  b.rowwise() += Eigen::RowVector2d(3.0, -2.0);
  EXPECT_LT(ProcrustesResidual(a, b), 1e-12);
  EXPECT_GT(ProcrustesResidual(a, Eigen::MatrixXd::Random(30, 2)), 0.1);
}

TEST(Tsne, CsvFormat) {
  Eigen::MatrixXd e(2, 2);
  e << 1.0, 2.0, -0.5, 0.25;
  EXPECT_EQ(FormatEmbeddingCsv(e, {"A", "B"}), "x,y,label\n1,2,A\n-0.5,0.25,B\n");
}

void QuadraticData(Eigen::MatrixXd &x, Eigen::VectorXd &y) {
  x.resize(20, 1);
  y.resize(20);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = -1.0 + 2.0 * i / 19.0;
    y[i] = x(i, 0) * x(i, 0);
  }
}

TEST(Svr, DefaultTubeBoundsTrainingError) {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  QuadraticData(x, y);
  const SvrModel m = SvrFit(x, y);
  EXPECT_TRUE(m.converged) << m.warning;
  EXPECT_LE((m.Predict(x) - y).cwiseAbs().maxCoeff(), 0.1 + 1e-3);
  EXPECT_LT(KktViolation(m, x, y), 1e-3);
}

// The tube of the default epsilon alone allows an RMSE near 0.07, so the
// quadratic fit uses a narrower tube.
TEST(Svr, FitsQuadratic) {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  QuadraticData(x, y);
  SvrConfig c;
  c.epsilon = 0.01;
  const SvrModel m = SvrFit(x, y, c);
  EXPECT_TRUE(m.converged) << m.warning;
  const Eigen::VectorXd f = m.Predict(x);
  const double rmse = std::sqrt((f - y).squaredNorm() / 20.0);
  EXPECT_LT(rmse, 0.05);
  EXPECT_LE(m.all_coefficients.cwiseAbs().maxCoeff(), 10.0);
  EXPECT_LT(KktViolation(m, x, y), 1e-3);
}

TEST(Svr, ConstantTargetsStayInTube) {
  Rng rng(1);
  Eigen::MatrixXd x(15, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.Normal();
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(15, 2.5);
  const SvrModel m = SvrFit(x, y);
  const Eigen::VectorXd f = m.Predict(x);
  for (Eigen::Index i = 0; i < 15; ++i) {
    EXPECT_GE(f[i], 2.4 - 1e-9);
    EXPECT_LE(f[i], 2.6 + 1e-9);
  }
}

TEST(Svr, KktAndBoxOnNoisyData) {
  Rng rng(8);
  Eigen::MatrixXd x(80, 4);
  Eigen::VectorXd y(80);
  for (Eigen::Index i = 0; i < 80; ++i) {
    for (int j = 0; j < 4; ++j) x(i, j) = rng.Normal(0.0, 0.5);
    y[i] = std::sin(x(i, 0)) + x(i, 1) * x(i, 2) + rng.Normal(0.0, 0.3);
  }
  const SvrModel m = SvrFit(x, y);
  EXPECT_TRUE(m.converged);
  EXPECT_LE(m.all_coefficients.cwiseAbs().maxCoeff(), 10.0);
  EXPECT_NEAR(m.all_coefficients.sum(), 0.0, 1e-9);
  EXPECT_LT(KktViolation(m, x, y), 1e-3);
  // Points strictly inside the tube carry no weight.
  const Eigen::VectorXd f = m.Predict(x);
  for (Eigen::Index i = 0; i < 80; ++i) {
    if (std::abs(y[i] - f[i]) < 0.1 - 1e-3) {
      EXPECT_EQ(m.all_coefficients[i], 0.0);
    }
  }
}

TEST(Svr, IterationCapWarns) {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  QuadraticData(x, y);
  SvrConfig c;
  c.max_iterations = 2;
  const SvrModel m = SvrFit(x, y, c);
  EXPECT_FALSE(m.converged);
  EXPECT_NE(m.warning.find("KKT violation"), std::string::npos);
  EXPECT_THROW(SvrFit(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)), DomainError);
}

}  // namespace
}  // namespace drp::analysis
