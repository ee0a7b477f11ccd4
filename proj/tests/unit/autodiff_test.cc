//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "drp/autodiff/adam.h"
#include "drp/autodiff/checkpoint.h"
#include "drp/autodiff/gradcheck.h"
#include "drp/autodiff/graph.h"
#include "drp/autodiff/layers.h"
#include "drp/autodiff/ops.h"
#include "drp/common/error.h"
#include "drp/common/rng.h"

namespace drp::ad {
namespace {

using Md = Matrix<double>;

Md Mat(int rows, int cols, std::initializer_list<double> values) {
  Md m(rows, cols);
  int i = 0;
  for (double v : values) m.data()[i++] = v;
  return m;
}

Md RandomMat(int rows, int cols, Rng &rng, double scale = 1.0) {
  Md m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.Normal() * scale;
  return m;
}

TEST(MatMulTest, IdentityLeavesMatrixUnchanged) {
  Graph<double> g;
  Var c = MatMul(g, g.Constant(Md::Identity(2, 2)), g.Constant(Mat(2, 2, {1, 2, 3, 4})));
  EXPECT_EQ(g.value(c), Mat(2, 2, {1, 2, 3, 4}));
}

TEST(MatMulTest, RowTimesColumn) {
  Graph<double> g;
  Var c = MatMul(g, g.Constant(Mat(1, 2, {1, 2})), g.Constant(Mat(2, 1, {3, 4})));
  EXPECT_DOUBLE_EQ(g.scalar(c), 11.0);
}

TEST(MatMulTest, InnerDimensionMismatchThrows) {
  Graph<double> g;
  EXPECT_THROW(MatMul(g, g.Constant(Md::Zero(2, 3)), g.Constant(Md::Zero(2, 3))),
               DimensionError);
}

TEST(MatMulTest, GradientOfSumMatchesFiniteDifferences) {
  Rng rng(3);
  Parameter<double> a("a", RandomMat(3, 4, rng));
  Parameter<double> b("b", RandomMat(4, 2, rng));
  std::vector<Parameter<double> *> params{&a, &b};
  auto result = Gradcheck(
      [&](Graph<double> &g) { return Sum(g, MatMul(g, g.Leaf(a), g.Leaf(b))); }, params);
  EXPECT_LT(result.max_rel_error, 1e-4);
  EXPECT_EQ(result.coords_checked, 20u);
}

TEST(ElementwiseTest, ReluSigmoidPrelu) {
  Graph<double> g;
  EXPECT_EQ(g.value(Relu(g, g.Constant(Mat(1, 3, {-1, 0, 2})))), Mat(1, 3, {0, 0, 2}));
  EXPECT_DOUBLE_EQ(g.scalar(Sigmoid(g, g.Scalar(0.0))), 0.5);
  Var p = PRelu(g, g.Constant(Mat(1, 2, {-4, 4})), g.Scalar(0.25));
  EXPECT_EQ(g.value(p), Mat(1, 2, {-1, 4}));
}

TEST(ElementwiseTest, ScalarBroadcastOnEitherSide) {
  Graph<double> g;
  Var x = g.Constant(Mat(2, 2, {1, 2, 3, 4}));
  EXPECT_EQ(g.value(Mul(g, g.Scalar(2.0), x)), Mat(2, 2, {2, 4, 6, 8}));
  EXPECT_EQ(g.value(Sub(g, x, g.Scalar(1.0))), Mat(2, 2, {0, 1, 2, 3}));
}

TEST(ElementwiseTest, IncompatibleShapesThrow) {
  Graph<double> g;
  EXPECT_THROW(Add(g, g.Constant(Md::Zero(2, 3)), g.Constant(Md::Zero(3, 2))), DimensionError);
  EXPECT_THROW(Mul(g, g.Constant(Md::Zero(1, 3)), g.Constant(Md::Zero(2, 3))), DimensionError);
}

TEST(ElementwiseTest, SmoothOpsPassGradcheck) {
  Rng rng(11);
  Parameter<double> x("x", RandomMat(3, 3, rng));
  Parameter<double> y("y", RandomMat(3, 3, rng));
  Parameter<double> slope("slope", Mat(1, 1, {0.25}));
  std::vector<Parameter<double> *> params{&x, &y, &slope};
  auto result = Gradcheck(
      [&](Graph<double> &g) {
        Var a = g.Leaf(x), b = g.Leaf(y);
        Var s = Add(g, Tanh(g, a), Sigmoid(g, b));
        Var m = Mul(g, s, Sub(g, a, b));
        Var e = Exp(g, Affine(g, Square(g, m), 0.1, 0.0));
        return Mean(g, Add(g, e, PRelu(g, m, g.Leaf(slope))));
      },
      params);
  EXPECT_LT(result.max_rel_error, 1e-6);
}

TEST(ElementwiseTest, GatherScatterConcatRowScaleGradcheck) {
  Rng rng(5);
  Parameter<double> x("x", RandomMat(4, 3, rng));
  Parameter<double> y("y", RandomMat(2, 2, rng));
  std::vector<Parameter<double> *> params{&x, &y};
  auto result = Gradcheck(
      [&](Graph<double> &g) {
        Var gathered = GatherRows(g, g.Leaf(x), {3, 0, 0, 2, 1});
        Var scattered = ScatterAddRows(g, gathered, {1, 1, 0, 0, 1}, 2);
        std::vector<Var> parts{scattered, g.Leaf(y)};
        Var wide = ConcatCols<double>(g, parts);
        Var scaled = RowScale(g, wide, std::vector<double>{0.5, 2.0});
        return Sum(g, Square(g, Tanh(g, scaled)));
      },
      params);
  EXPECT_LT(result.max_rel_error, 1e-6);
}

TEST(BatchNormTest, StandardizedInputIsUnchanged) {
  Graph<double> g;
  BatchNormState<double> state(2);
  Md x = Mat(2, 2, {-1, 1, 1, -1});  // column mean 0, biased variance 1
  Var y = BatchNorm(g, g.Constant(x), g.Constant(Md::Ones(1, 2)), g.Constant(Md::Zero(1, 2)),
                    state, true);
  EXPECT_TRUE(g.value(y).isApprox(x / std::sqrt(1.0 + 1e-5), 1e-12));
  EXPECT_NEAR(g.value(y)(0, 0), -1.0, 1e-5);
}

TEST(BatchNormTest, ZeroGammaGivesBeta) {
  Rng rng(2);
  Graph<double> g;
  BatchNormState<double> state(3);
  Md beta = Mat(1, 3, {0.5, -1.0, 2.0});
  Var y = BatchNorm(g, g.Constant(RandomMat(5, 3, rng)), g.Constant(Md::Zero(1, 3)),
                    g.Constant(beta), state, true);
  for (int r = 0; r < 5; ++r) EXPECT_EQ(g.value(y).row(r), beta);
}

TEST(BatchNormTest, SingleRowInTrainModeThrows) {
  Graph<double> g;
  BatchNormState<double> state(2);
  EXPECT_THROW(BatchNorm(g, g.Constant(Md::Ones(1, 2)), g.Constant(Md::Ones(1, 2)),
                         g.Constant(Md::Zero(1, 2)), state, true),
               DomainError);
}

TEST(BatchNormTest, RunningStatisticsAndEvalMode) {
  Graph<double> g;
  BatchNormState<double> state(1);
  Md x = Mat(2, 1, {1.0, 3.0});
  BatchNorm(g, g.Constant(x), g.Constant(Md::Ones(1, 1)), g.Constant(Md::Zero(1, 1)), state,
            true);
  // momentum 0.1 from mean 0 / var 1; unbiased batch variance is 2.
  EXPECT_NEAR(state.running_mean(0, 0), 0.2, 1e-12);
  EXPECT_NEAR(state.running_var(0, 0), 0.9 + 0.1 * 2.0, 1e-12);
  Var y = BatchNorm(g, g.Constant(Mat(1, 1, {0.2})), g.Constant(Md::Ones(1, 1)),
                    g.Constant(Md::Zero(1, 1)), state, false);
  EXPECT_NEAR(g.scalar(y), 0.0, 1e-12);
}

TEST(BatchNormTest, TrainModeGradcheck) {
  Rng rng(7);
  Parameter<double> x("x", RandomMat(6, 4, rng));
  Parameter<double> gamma("gamma", RandomMat(1, 4, rng));
  Parameter<double> beta("beta", RandomMat(1, 4, rng));
  Md weights = RandomMat(6, 4, rng);
  std::vector<Parameter<double> *> params{&x, &gamma, &beta};
  auto result = Gradcheck(
      [&](Graph<double> &g) {
        BatchNormState<double> state(4);
        Var y = BatchNorm(g, g.Leaf(x), g.Leaf(gamma), g.Leaf(beta), state, true);
        return Sum(g, Mul(g, Tanh(g, y), g.Constant(weights)));
      },
      params);
  EXPECT_LT(result.max_rel_error, 1e-4);
}

TEST(LossTest, BceRejectsTargetsOutsideUnitInterval) {
  Graph<double> g;
  EXPECT_THROW(BceWithLogits(g, g.Constant(Md::Zero(1, 2)), Mat(1, 2, {0.5, 1.5})), DomainError);
}

TEST(LossTest, BceAtZeroLogitsIsLogTwoPerColumn) {
  Graph<double> g;
  Var l = BceWithLogits(g, g.Constant(Md::Zero(2, 3)), Mat(2, 3, {0, 1, 0.5, 1, 0, 0.2}));
  EXPECT_NEAR(g.scalar(l), 3.0 * std::log(2.0), 1e-12);
}

TEST(LossTest, KlClosedForm) {
  Graph<double> g;
  EXPECT_NEAR(g.scalar(KlStdNormal(g, g.Constant(Mat(1, 1, {1.0})), g.Constant(Mat(1, 1, {0.0})))),
              0.5, 1e-15);
  EXPECT_EQ(g.scalar(KlStdNormal(g, g.Constant(Md::Zero(3, 4)), g.Constant(Md::Zero(3, 4)))), 0.0);
}

TEST(LossTest, KlIsNonNegativeForRandomInputs) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    Graph<double> g;
    Var kl = KlStdNormal(g, g.Constant(RandomMat(3, 5, rng, 3.0)),
                         g.Constant(RandomMat(3, 5, rng, 3.0)));
    EXPECT_GE(g.scalar(kl), 0.0);
  }
}

TEST(LossTest, LossesPassGradcheck) {
  Rng rng(17);
  Parameter<double> logits("logits", RandomMat(3, 4, rng));
  Parameter<double> mu("mu", RandomMat(3, 2, rng));
  Parameter<double> logvar("logvar", RandomMat(3, 2, rng, 0.5));
  Md target(3, 4);
  for (Eigen::Index i = 0; i < target.size(); ++i) target.data()[i] = rng.Uniform();
  Md eps = RandomMat(3, 2, rng);
  Md y = RandomMat(3, 2, rng);
  std::vector<Parameter<double> *> params{&logits, &mu, &logvar};
  auto result = Gradcheck(
      [&](Graph<double> &g) {
        Var m = g.Leaf(mu), lv = g.Leaf(logvar);
        Var bce = BceWithLogits(g, g.Leaf(logits), target);
        Var kl = KlStdNormal(g, m, lv);
        Var mse = Mse(g, Reparameterize(g, m, lv, eps), y);
        return Add(g, Add(g, bce, kl), mse);
      },
      params);
  EXPECT_LT(result.max_rel_error, 1e-6);
}

TEST(GradcheckTest, SumOfSquares) {
  Parameter<double> x("x", Mat(1, 2, {1, 2}));
  std::vector<Parameter<double> *> params{&x};
  auto result =
      Gradcheck([&](Graph<double> &g) { return Sum(g, Square(g, g.Leaf(x))); }, params);
  EXPECT_LT(result.max_rel_error, 1e-6);
  Graph<double> g;
  Var loss = Sum(g, Square(g, g.Leaf(x)));
  x.ZeroGrad();
  g.Backward(loss);
  EXPECT_EQ(x.grad, Mat(1, 2, {2, 4}));
}

TEST(GradcheckTest, ConstantFunctionHasZeroError) {
  Parameter<double> x("x", Mat(1, 2, {1, 2}));
  std::vector<Parameter<double> *> params{&x};
  auto result = Gradcheck([&](Graph<double> &g) { return g.Scalar(3.0); }, params);
  EXPECT_EQ(result.max_rel_error, 0.0);
}

TEST(GradcheckTest, KinkWithinStepIsSkippedOnlyWhenAsked) {
  // x = 4e-6 sits inside the probe interval around the ReLU kink at 0.
  Parameter<double> x("x", Mat(1, 2, {4e-6, 1.0}));
  std::vector<Parameter<double> *> params{&x};
  auto f = [&](Graph<double> &g) { return Sum(g, Relu(g, g.Leaf(x))); };
  const auto plain = Gradcheck(f, params);
  EXPECT_GT(plain.max_rel_error, 0.1);
  const auto skipping = Gradcheck(f, params, {.skip_kinks = true});
  EXPECT_EQ(skipping.kinks_skipped, 1u);
  EXPECT_EQ(skipping.coords_checked, 1u);
  EXPECT_LT(skipping.max_rel_error, 1e-8);
}

TEST(GradcheckTest, WrongGradientOnSmoothFunctionIsStillReported) {
  Parameter<double> x("x", Mat(1, 2, {0.5, -1.5}));
  std::vector<Parameter<double> *> params{&x};
  // The constant term follows x in value but is invisible to backward.
  auto f = [&](Graph<double> &g) {
    return Add(g, Sum(g, Square(g, g.Leaf(x))), Sum(g, g.Constant(Md(x.value * 3.0))));
  };
  const auto result = Gradcheck(f, params, {.skip_kinks = true});
  EXPECT_EQ(result.kinks_skipped, 0u);
  EXPECT_GT(result.max_rel_error, 0.5);
}

TEST(GradcheckTest, NonFiniteFunctionThrows) {
  Parameter<double> x("x", Mat(1, 1, {1}));
  std::vector<Parameter<double> *> params{&x};
  EXPECT_THROW(Gradcheck([&](Graph<double> &g) { return g.Scalar(NAN); }, params), Error);
}

TEST(AdamTest, SingleStepFromZero) {
  Parameter<double> p("p", Mat(1, 1, {0.0}));
  Adam<double> adam({&p});
  p.grad(0, 0) = 1.0;
  adam.Step();
  EXPECT_NEAR(p.value(0, 0), -0.001, 1e-9);
  EXPECT_EQ(adam.step_count(), 1);
}

TEST(AdamTest, ZeroGradientLeavesParameters) {
  Parameter<double> p("p", Mat(1, 3, {1, -2, 3}));
  Adam<double> adam({&p});
  for (int i = 0; i < 5; ++i) adam.Step();
  EXPECT_EQ(p.value, Mat(1, 3, {1, -2, 3}));
}

TEST(AdamTest, ConstantGradientMovesMonotonically) {
  Parameter<double> p("p", Mat(1, 2, {0, 0}));
  Adam<double> adam({&p});
  Md last = p.value;
  for (int i = 0; i < 100; ++i) {
    p.grad = Mat(1, 2, {2.0, -0.5});
    adam.Step();
    EXPECT_LT(p.value(0, 0), last(0, 0));
    EXPECT_GT(p.value(0, 1), last(0, 1));
    last = p.value;
  }
}

TEST(AdamTest, NanGradientDiverges) {
  Parameter<double> p("p", Mat(1, 1, {0.0}));
  Adam<double> adam({&p});
  p.grad(0, 0) = NAN;
  EXPECT_THROW(adam.Step(), TrainingDiverged);
}

TEST(GraphTest, BackwardRejectsNonFiniteLoss) {
  Parameter<double> p("p", Mat(1, 1, {-1.0}));
  Graph<double> g;
  Var loss = Sum(g, Mul(g, g.Leaf(p), g.Scalar(INFINITY)));
  EXPECT_THROW(g.Backward(loss), TrainingDiverged);
}

TEST(GraphTest, RecomputeChangesOnlyDownstreamNodes) {
  Rng rng(21);
  Graph<double> g;
  Var a = g.Constant(RandomMat(2, 2, rng));
  Var b = g.Constant(RandomMat(2, 2, rng));
  Var c = g.Constant(RandomMat(2, 2, rng));
  Var ab = MatMul(g, a, b);
  Var cc = Tanh(g, c);
  Var out = Add(g, Relu(g, ab), cc);
  Sum(g, out);
  std::vector<Md> before;
  for (std::size_t i = 0; i < g.size(); ++i) before.push_back(g.value(static_cast<int>(i)));
  g.SetLeafValue(b, RandomMat(2, 2, rng) + Md::Constant(2, 2, 5.0));
  g.Recompute();
  const std::vector<bool> downstream = g.Downstream(b);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const bool changed = g.value(static_cast<int>(i)) != before[i];
    if (!downstream[i]) {
      EXPECT_FALSE(changed) << "node " << i;
    }
  }
  EXPECT_FALSE(downstream[a.id]);
  EXPECT_FALSE(downstream[cc.id]);
  EXPECT_TRUE(downstream[ab.id]);
  EXPECT_TRUE(downstream[out.id]);
}

TEST(GraphTest, ForwardIsDeterministic) {
  auto run = [] {
    Rng rng(4);
    Dense<float> layer("d", 5, 3, rng);
    Graph<float> g;
    Matrix<float> x = Matrix<float>::Ones(2, 5);
    return Matrix<float>(g.value(Tanh(g, layer.Forward(g, g.Constant(x)))));
  };
  EXPECT_EQ(run(), run());
}

TEST(CheckpointTest, RoundTripPreservesArrays) {
  Checkpoint ckpt;
  Rng rng(8);
  Md d = RandomMat(3, 2, rng);
  Matrix<float> f = RandomMat(2, 5, rng).cast<float>();
  ckpt.PutMatrix("double", d);
  ckpt.PutMatrix("float", f);
  ckpt.PutVector("vec", {1.5, -2.25});
  ckpt.PutInts("ints", {1, -7, 1LL << 40});
  ckpt.PutText("text", "hello");
  Checkpoint back = Checkpoint::Deserialize(ckpt.Serialize());
  EXPECT_EQ(back.GetMatrix<double>("double"), d);
  EXPECT_EQ(back.GetMatrix<float>("float"), f);
  EXPECT_EQ(back.GetVector("vec"), (std::vector<double>{1.5, -2.25}));
  EXPECT_EQ(back.GetInts("ints"), (std::vector<std::int64_t>{1, -7, 1LL << 40}));
  EXPECT_EQ(back.GetText("text"), "hello");
  EXPECT_EQ(back.Serialize(), ckpt.Serialize());
}

TEST(CheckpointTest, CorruptInputThrows) {
  Checkpoint ckpt;
  ckpt.PutVector("v", {1.0});
  std::string bytes = ckpt.Serialize();
  EXPECT_THROW(Checkpoint::Deserialize(bytes.substr(0, bytes.size() - 3)), DataError);
  bytes[0] = 'X';
  EXPECT_THROW(Checkpoint::Deserialize(bytes), DataError);
}

TEST(CheckpointTest, LoadParametersChecksShape) {
  Rng rng(1);
  Dense<float> a("layer", 4, 3, rng), b("layer", 4, 2, rng);
  std::vector<Parameter<float> *> pa, pb;
  a.Collect(pa);
  b.Collect(pb);
  Checkpoint ckpt;
  SaveParameters(ckpt, pa);
  EXPECT_THROW(LoadParameters(ckpt, pb), DimensionError);
}

}  // namespace
}  // namespace drp::ad
