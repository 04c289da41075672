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
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "deplima/mst.h"
#include "support/oracles.h"

namespace deplima {
namespace {

using nn::Tensor;

Tensor Scores(std::size_t n, std::vector<double> v) { return Tensor({n + 1, n}, std::move(v)); }

TEST(MstTest, SingleToken) {
  EXPECT_EQ(DecodeSingleRootTree(Scores(1, {-3.0, 7.0})), (std::vector<int>{0}));
}

TEST(MstTest, BreaksGreedyCycle) {
  // Columns are tokens 1 and 2; rows are root, 1, 2. Greedy heads pick
  // 2 -> 1 and 1 -> 2.
  const Tensor s = Scores(2, {5.0, 1.0,    //
                              -9.0, 10.0,  //
                              10.0, -9.0});
  const std::vector<int> heads = DecodeSingleRootTree(s);
  EXPECT_EQ(heads, (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(TreeScore(s, heads), 15.0);
}

TEST(MstTest, OneRootChildEvenWhenRootArcsDominate) {
  const Tensor s = Scores(3, {9.0, 9.0, 9.0,  //
                              -1.0, 0.0, 0.0, //
                              0.0, -1.0, 0.0, //
                              0.0, 0.0, -1.0});
  const std::vector<int> heads = DecodeSingleRootTree(s);
  EXPECT_TRUE(IsSingleRootTree(heads));
  EXPECT_EQ(std::count(heads.begin(), heads.end(), 0), 1);
  EXPECT_DOUBLE_EQ(TreeScore(s, heads), 9.0);
}

TEST(MstTest, ArborescenceContractsNestedCycles) {
  const double x = -std::numeric_limits<double>::infinity();
  // Node 0 reaches only 1; 1-2-3 form a strong cycle.
  const std::vector<std::vector<double>> w = {
      {x, 1.0, x, x},
      {x, x, 10.0, 2.0},
      {x, 3.0, x, 10.0},
      {x, 10.0, 1.0, x},
  };
  const std::vector<int> heads = MaxArborescence(w);
  EXPECT_EQ(heads, (std::vector<int>{-1, 0, 1, 2}));
}

TEST(MstTest, UnreachableNodeGivesEmpty) {
  const double x = -std::numeric_limits<double>::infinity();
  const std::vector<std::vector<double>> w = {{x, 1.0, x}, {x, x, x}, {x, x, x}};
  EXPECT_TRUE(MaxArborescence(w).empty());
}

TEST(MstTest, TreeValidity) {
  EXPECT_TRUE(IsSingleRootTree({0, 1, 2}));
  EXPECT_FALSE(IsSingleRootTree({0, 0}));
  EXPECT_FALSE(IsSingleRootTree({2, 1}));
  EXPECT_FALSE(IsSingleRootTree({0, 2}));
  EXPECT_FALSE(IsSingleRootTree({0, 3}));
}

TEST(MstTest, MatchesExhaustiveSearch) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t n = 1 + seed % 5;
    const bool integral = seed % 2 == 1;
    const Tensor s = testing::RandomMatrix(n + 1, n, integral, seed);
    const std::vector<int> expected = testing::BruteSingleRootTree(s);
    const std::vector<int> got = DecodeSingleRootTree(s);
    ASSERT_TRUE(IsSingleRootTree(got)) << "seed " << seed;
    EXPECT_NEAR(TreeScore(s, got), TreeScore(s, expected), 1e-9) << "seed " << seed;
    if (!integral) EXPECT_EQ(got, expected) << "seed " << seed;
  }
}

}  // namespace
}  // namespace deplima
