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

#include <gtest/gtest.h>

#include "deplima/crf.h"
#include "deplima/grad_check.h"
#include "deplima/rng.h"
#include "support/oracles.h"

namespace deplima::nn {
namespace {

using deplima::testing::BruteLogPartition;
using deplima::testing::BrutePathScore;
using deplima::testing::BruteViterbi;
using deplima::testing::RandomMatrix;
using deplima::testing::AllPaths;

TEST(CrfTest, PartitionSmallCases) {
  EXPECT_NEAR(CrfLogPartition(Tensor::Matrix(1, 2, {0, 0}), Tensor({2, 2})),
              std::log(2.0), 1e-15);
  EXPECT_NEAR(CrfLogPartition(Tensor({2, 2}), Tensor({2, 2})), std::log(4.0),
              1e-15);
}

TEST(CrfTest, PartitionMatchesBruteForce) {
  const Tensor e = RandomMatrix(4, 3, false, 1);
  const Tensor t = RandomMatrix(3, 3, false, 2);
  EXPECT_NEAR(CrfLogPartition(e, t), BruteLogPartition(e, t), 1e-10);
}

TEST(CrfTest, PartitionBoundsAndSingleLabel) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Tensor e = RandomMatrix(3, 3, false, seed);
    const Tensor t = RandomMatrix(3, 3, false, seed + 100);
    const double z = CrfLogPartition(e, t);
    double total = 0.0;
    for (const auto &p : AllPaths(3, 3)) {
      const double s = BrutePathScore(e, t, p);
      EXPECT_GE(z, s);
      total += std::exp(s - z);
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
  const Tensor e1 = RandomMatrix(5, 1, false, 3);
  const Tensor t1 = RandomMatrix(1, 1, false, 4);
  const std::vector<std::size_t> only(5, 0);
  EXPECT_NEAR(CrfLogPartition(e1, t1), CrfPathScore(e1, t1, only), 1e-12);
}

TEST(CrfTest, ViterbiExamples) {
  EXPECT_EQ(ViterbiDecode(Tensor::Matrix(1, 2, {1, 0}), Tensor({2, 2})),
            (std::vector<std::size_t>{0}));
  EXPECT_EQ(ViterbiDecode(Tensor::Matrix(2, 2, {0, 1, 1, 0}), Tensor({2, 2})),
            (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(ViterbiDecode(Tensor({3, 3}), Tensor({3, 3})),
            (std::vector<std::size_t>{0, 0, 0}));
}

TEST(CrfTest, ViterbiMatchesExhaustiveSearch) {
  std::uint64_t seed = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    for (std::size_t l = 1; l <= 4; ++l) {
      for (bool integral : {true, false}) {
        const Tensor e = RandomMatrix(n, l, integral, ++seed);
        const Tensor t = RandomMatrix(l, l, integral, ++seed);
        EXPECT_EQ(ViterbiDecode(e, t), BruteViterbi(e, t))
            << "n=" << n << " L=" << l;
      }
    }
  }
}

TEST(CrfTest, ShapeErrors) {
  EXPECT_THROW(ViterbiDecode(Tensor({0, 2}), Tensor({2, 2})), NumericsError);
  EXPECT_THROW(CrfLogPartition(Tensor({2, 3}), Tensor({2, 2})), NumericsError);
}

TEST(CrfTest, MarginalsMatchBruteForce) {
  const Tensor e = RandomMatrix(3, 3, false, 7);
  const Tensor t = RandomMatrix(3, 3, false, 8);
  const Tensor m = CrfMarginals(e, t);
  const double z = BruteLogPartition(e, t);
  Tensor expect({3, 3});
  for (const auto &p : AllPaths(3, 3)) {
    const double w = std::exp(BrutePathScore(e, t, p) - z);
    for (std::size_t i = 0; i < 3; ++i) expect.at(i, p[i]) += w;
  }
  for (std::size_t i = 0; i < 9; ++i)
    EXPECT_NEAR(m.values[i], expect.values[i], 1e-12);
}

TEST(CrfTest, NllGradient) {
  Var e = Parameter(RandomMatrix(3, 2, false, 9));
  Var t = Parameter(RandomMatrix(2, 2, false, 10));
  const std::vector<std::size_t> gold{1, 0, 1};
  auto f = [&] { return CrfNll(e, t, gold); };
  EXPECT_LT(GradCheck(f, std::vector<Var>{e, t}), 1e-6);
  auto g = [&] { return CrfLogPartition(e, t); };
  EXPECT_LT(GradCheck(g, std::vector<Var>{e}), 1e-6);
}

TEST(CrfTest, MarginalsGradient) {
  Var e = Parameter(RandomMatrix(4, 3, false, 11));
  Var t = Parameter(RandomMatrix(3, 3, false, 12));
  Var w = Constant(RandomMatrix(4, 3, false, 13));
  auto f = [&] { return Sum(Mul(CrfMarginals(e, t), w)); };
  EXPECT_LT(GradCheck(f, std::vector<Var>{e, t}), 1e-6);
}

}  // namespace
}  // namespace deplima::nn
