// Copyright 2026 The deplima Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "deplima/archive.h"
#include "deplima/grad_check.h"
#include "deplima/optimizer.h"
#include "deplima/rng.h"
#include "deplima/rnn.h"
#include "deplima/tensor.h"

namespace deplima::nn {
namespace {

Var RandParam(Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(shape);
  for (double &v : t.values) v = rng.Uniform(-1.0, 1.0);
  return Parameter(std::move(t));
}

TEST(TensorTest, ShapeInvariant) {
  Tensor t({2, 3});
  EXPECT_EQ(t.size(), 6u);
  EXPECT_FALSE(t.has_grad());
  t.ZeroGrad();
  EXPECT_TRUE(t.has_grad());
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), NumericsError);
}

TEST(TensorTest, XavierBounds) {
  Rng rng(3);
  const Tensor t = XavierUniform({20, 30}, rng);
  const double a = std::sqrt(6.0 / 50.0);
  for (double v : t.values) {
    EXPECT_LE(std::abs(v), a);
  }
}

TEST(GradCheckTest, SumOfSquares) {
  Var x = Parameter(Tensor::Vector({1, 2, 3}));
  auto f = [&] { return Dot(x, x); };
  Var y = f();
  y.Backward();
  EXPECT_EQ(x.tensor().grad, (std::vector<double>{2, 4, 6}));
  x.tensor().ZeroGrad();
  GradCheckOptions opts;
  opts.step = 1e-5;
  EXPECT_LT(GradCheck(f, std::vector<Var>{x}, opts), 1e-8);
}

TEST(GradCheckTest, ConstantHasZeroGradient) {
  Var x = Parameter(Tensor::Vector({1, 2}));
  auto f = [&] { return Constant(Tensor::Scalar(4.0)); };
  EXPECT_EQ(GradCheck(f, std::vector<Var>{x}), 0.0);
  Var y = Add(Scale(Sum(x), 0.0), Constant(Tensor::Scalar(4.0)));
  y.Backward();
  EXPECT_EQ(x.tensor().grad, (std::vector<double>{0, 0}));
}

TEST(GradCheckTest, NonFiniteRejected) {
  Var x = Parameter(Tensor::Vector({1.0}));
  auto f = [&] {
    return Scale(Sum(x), std::numeric_limits<double>::infinity());
  };
  EXPECT_THROW(GradCheck(f, std::vector<Var>{x}), NumericsError);
}

TEST(OpsTest, ElementwiseAndLinearAlgebraGradients) {
  Var a = RandParam({3, 4}, 1);
  Var b = RandParam({4, 2}, 2);
  Var v = RandParam({4}, 3);
  Var u = RandParam({3}, 4);
  Var c = RandParam({2, 4}, 5);
  std::vector<Var> params{a, b, v, u, c};
  auto f = [&] {
    Var m = MatMul(a, b);                        // [3,2]
    Var mv = MatVec(a, v);                       // [3]
    Var mt = MatVecT(a, u);                      // [4]
    Var nt = MatMulNT(a, c);                     // [3,2]
    Var r = AddRowVector(nt, Slice(mt, 1, 2));   // [3,2]
    Var e = Mul(Tanh(mv), Sigmoid(u));
    Var cat = Concat(std::vector<Var>{Sum(Relu(m)), e, Row(r, 2)});
    return Add(Dot(cat, cat), Sum(Sub(mt, Scale(v, 0.5))));
  };
  EXPECT_LT(GradCheck(f, params), 1e-6);
}

TEST(OpsTest, StackMeanRowsSoftmaxGradients) {
  Var t = RandParam({5, 3}, 6);
  Var x = RandParam({3}, 7);
  std::vector<Var> params{t, x};
  const std::vector<std::size_t> rows{0, 2, 2, 4};
  auto f = [&] {
    Var m = MeanRows(t, rows);
    Var s = Stack(std::vector<Var>{m, x, Softmax(x)});
    return Add(SoftmaxNll(Row(s, 0), 1), Sum(Mul(Softmax(Row(s, 1)), x)));
  };
  EXPECT_LT(GradCheck(f, params), 1e-6);
}

TEST(OpsTest, GatherConcatUnstack) {
  Var t = RandParam({4, 2}, 8);
  Var u = RandParam({3, 3}, 9);
  std::vector<Var> params{t, u};
  const std::vector<std::size_t> a{3, 0, 3};
  const std::vector<std::size_t> b{1, 1, 2};
  Var joined = ConcatColumns(std::vector<Var>{GatherRows(t, a), GatherRows(u, b)});
  ASSERT_EQ(joined.shape(), (Shape{3, 5}));
  EXPECT_EQ(joined.tensor().at(0, 1), t.tensor().at(3, 1));
  EXPECT_EQ(joined.tensor().at(2, 4), u.tensor().at(2, 2));
  const auto rows = Unstack(joined);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].values()[2], u.tensor().at(1, 0));
  auto f = [&] {
    Var j = ConcatColumns(std::vector<Var>{GatherRows(t, a), GatherRows(u, b)});
    const auto r = Unstack(j);
    return Add(Sum(Mul(r[0], r[2])), Sum(Tanh(r[1])));
  };
  EXPECT_LT(GradCheck(f, params), 1e-6);
  EXPECT_THROW(ConcatColumns(std::vector<Var>{t, u}), NumericsError);
}

TEST(OpsTest, SoftmaxNormalizes) {
  Var p = Softmax(Constant(Tensor::Vector({1000.0, 1000.0, -5.0})));
  EXPECT_NEAR(p.values()[0], 0.5, 1e-12);
  EXPECT_NEAR(std::accumulate(p.values().begin(), p.values().end(), 0.0), 1.0,
              1e-12);
}

TEST(OpsTest, MaskedColumnNllMatchesManual) {
  // Column 0 excludes row 1; column 1 has no exclusion.
  Var s = RandParam({3, 2}, 8);
  const std::vector<std::size_t> gold{2, 0}, excl{1, 99};
  Var loss = MaskedColumnNll(s, gold, excl);
  const auto &v = s.values();
  const double c0 = -(v[4] - std::log(std::exp(v[0]) + std::exp(v[4])));
  const double c1 =
      -(v[1] - std::log(std::exp(v[1]) + std::exp(v[3]) + std::exp(v[5])));
  EXPECT_NEAR(loss.scalar(), c0 + c1, 1e-12);
  auto f = [&] { return MaskedColumnNll(s, gold, excl); };
  EXPECT_LT(GradCheck(f, std::vector<Var>{s}), 1e-6);
}

TEST(OpsTest, DimMismatchDetected) {
  Var a = Constant(Tensor::Vector({1, 2}));
  Var b = Constant(Tensor::Vector({1, 2, 3}));
  EXPECT_THROW(Add(a, b), NumericsError);
  EXPECT_THROW(Dot(a, b), NumericsError);
  EXPECT_THROW(MatVec(Constant(Tensor({2, 2})), b), NumericsError);
}

TEST(OpsTest, NoGradScopeRecordsNothing) {
  Var x = RandParam({3}, 9);
  NoGradScope scope;
  Var y = Tanh(x);
  EXPECT_FALSE(y.requires_grad());
  EXPECT_TRUE(y.node()->parents.empty());
}

TEST(OpsTest, LeafGradientsAccumulate) {
  Var x = Parameter(Tensor::Vector({2.0}));
  Sum(x).Backward();
  Sum(x).Backward();
  EXPECT_EQ(x.tensor().grad[0], 2.0);
}

// Hand-evaluated gated cell step: x = [1], h = [0], all weights 0.5.
TEST(GruTest, SingleStepByHand) {
  Var x = Constant(Tensor::Vector({1.0}));
  Var h = Constant(Tensor::Vector({0.0}));
  Var wx = Constant(Tensor({3, 1}, 0.5));
  Var uh = Constant(Tensor({3, 1}, 0.5));
  Var b = Constant(Tensor({3}, 0.5));
  const double z = 1.0 / (1.0 + std::exp(-1.0));
  const double n = std::tanh(1.0);
  EXPECT_NEAR(GruCell(x, h, wx, uh, b).values()[0], z * n, 1e-15);
}

TEST(GruTest, CellGradient) {
  Var x = RandParam({3}, 10);
  Var h = RandParam({4}, 11);
  Var wx = RandParam({12, 3}, 12);
  Var uh = RandParam({12, 4}, 13);
  Var b = RandParam({12}, 14);
  std::vector<Var> params{x, h, wx, uh, b};
  auto f = [&] {
    Var h1 = GruCell(x, h, wx, uh, b);
    Var h2 = GruCell(x, h1, wx, uh, b);
    return Dot(h2, RandParam({4}, 15));
  };
  EXPECT_LT(GradCheck(f, params), 1e-6);
}

TEST(BiRnnTest, ZeroParamsGiveZeroOutputs) {
  BiRnnParams p{ZeroGru(2, 4), ZeroGru(2, 4)};
  std::vector<Var> in{Constant(Tensor::Vector({1, -2})),
                      Constant(Tensor::Vector({3, 4})),
                      Constant(Tensor::Vector({0.5, 0.5}))};
  const auto out = BiRnnForward(p, in);
  ASSERT_EQ(out.size(), 3u);
  for (const auto &o : out) {
    EXPECT_EQ(o.size(), 8u);
    for (double v : o.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(BiRnnTest, LengthOneMirroredHalvesAgree) {
  Rng rng(4);
  GruParams g = MakeGru(3, 5, rng);
  BiRnnParams p{g, g};
  std::vector<Var> in{RandParam({3}, 16)};
  const auto out = BiRnnForward(p, in);
  ASSERT_EQ(out.size(), 1u);
  for (std::size_t i = 0; i < 5; ++i)
    EXPECT_EQ(out[0].values()[i], out[0].values()[5 + i]);
}

TEST(BiRnnTest, DirectionsReadTheRightPrefixes) {
  Rng rng(5);
  BiRnnParams p = MakeBiRnn(2, 3, rng);
  std::vector<Var> in{RandParam({2}, 17), RandParam({2}, 18), RandParam({2}, 19)};
  const auto out = BiRnnForward(p, in);
  // Forward half at t=1 only depends on inputs 0..1.
  const auto fw = RunGru(p.forward, std::span<const Var>(in).first(2));
  // Backward half at t=1 only depends on inputs 1..2.
  const auto bw = RunGru(p.backward, std::span<const Var>(in).subspan(1), true);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(out[1].values()[i], fw[1].values()[i]);
    EXPECT_DOUBLE_EQ(out[1].values()[3 + i], bw[0].values()[i]);
  }
}

TEST(BiRnnTest, ShapeErrors) {
  Rng rng(6);
  BiRnnParams p = MakeBiRnn(2, 3, rng);
  EXPECT_THROW(BiRnnForward(p, std::vector<Var>{}), NumericsError);
  EXPECT_THROW(BiRnnForward(p, std::vector<Var>{RandParam({3}, 1)}), NumericsError);
}

TEST(BiRnnTest, GradientFlowsToInputsAndParams) {
  Rng rng(7);
  BiRnnParams p = MakeBiRnn(2, 3, rng);
  std::vector<Var> in{RandParam({2}, 20), RandParam({2}, 21)};
  std::vector<Var> params = p.Parameters();
  params.insert(params.end(), in.begin(), in.end());
  Var w = RandParam({12}, 22);
  auto f = [&] {
    const auto out = BiRnnForward(p, in);
    return Dot(Concat(out), w);
  };
  EXPECT_LT(GradCheck(f, params), 1e-6);
}

TEST(AdamTest, ZeroGradientLeavesParamsUnchanged) {
  Var x = Parameter(Tensor::Vector({1.5, -2.0}));
  std::vector<Var> params{x};
  ZeroGrads(params);
  Adam adam;
  adam.Step(params);
  EXPECT_EQ(adam.steps(), 1u);
  EXPECT_EQ(x.values(), (std::vector<double>{1.5, -2.0}));
}

TEST(AdamTest, FirstStepByHand) {
  Var x = Parameter(Tensor::Scalar(1.0));
  std::vector<Var> params{x};
  ZeroGrads(params);
  x.tensor().grad[0] = 1.0;
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  Adam adam(cfg);
  adam.Step(params);
  // m̂ = 1, v̂ = 1 at t = 1.
  EXPECT_NEAR(x.scalar(), 1.0 - 0.1 / (1.0 + 1e-8), 1e-15);
  EXPECT_TRUE(x.tensor().has_grad());
  EXPECT_EQ(x.tensor().grad[0], 0.0);
}

TEST(AdamTest, ConstantGradientDecreasesMonotonically) {
  Var x = Parameter(Tensor::Scalar(0.0));
  std::vector<Var> params{x};
  Adam adam;
  double prev = x.scalar();
  for (int i = 0; i < 2; ++i) {
    ZeroGrads(params);
    x.tensor().grad[0] = 3.0;
    adam.Step(params);
    EXPECT_LT(x.scalar(), prev);
    prev = x.scalar();
  }
}

TEST(AdamTest, MissingGradient) {
  Var x = Parameter(Tensor::Scalar(0.0));
  Adam adam;
  try {
    adam.Step(std::vector<Var>{x});
    FAIL();
  } catch (const NumericsError &e) {
    EXPECT_EQ(e.kind(), NumericsErrc::kMissingGradient);
  }
}

TEST(ArchiveTest, RoundTripIsByteStable) {
  ModelArchive a;
  a.PutTensor("b", Tensor::Matrix(2, 2, {1, 2, 3, 4.25}));
  a.PutTensor("a", Tensor::Vector({-0.0, 1e-300}));
  a.PutText("vocab", "x\t0\ny\t1\n");
  const std::string bytes = a.Serialize();
  EXPECT_EQ(bytes.substr(0, 4), "DLMA");
  const ModelArchive b = ModelArchive::Deserialize(bytes);
  EXPECT_EQ(b.GetTensor("b").values, a.GetTensor("b").values);
  EXPECT_EQ(b.GetTensor("b").shape, (Shape{2, 2}));
  EXPECT_EQ(b.GetText("vocab"), "x\t0\ny\t1\n");
  EXPECT_EQ(b.Serialize(), bytes);
}

TEST(ArchiveTest, BadInputsRejected) {
  EXPECT_THROW(ModelArchive::Deserialize("DLMX"), NumericsError);
  ModelArchive a;
  a.PutTensor("w", Tensor({2, 3}));
  std::string bytes = a.Serialize();
  EXPECT_THROW(ModelArchive::Deserialize(bytes.substr(0, bytes.size() - 1)),
               NumericsError);
  EXPECT_THROW(a.GetParameter("w", {3, 2}), NumericsError);
  EXPECT_THROW(a.GetTensor("missing"), NumericsError);
}

}  // namespace
}  // namespace deplima::nn
