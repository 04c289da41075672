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

#include <functional>

#include <gtest/gtest.h>

#include "deplima/graph.h"
#include "deplima/rng.h"

namespace deplima {
namespace {

// Independent path counter: plain recursive DFS over successor sets.
std::size_t DfsCount(const AnalysisGraph &g, NodeId n) {
  if (n == AnalysisGraph::kEnd) return 1;
  std::size_t c = 0;
  for (NodeId s : g.successors(n)) c += DfsCount(g, s);
  return c;
}

std::vector<TokenSpan> Spans(const std::vector<std::string> &words) {
  std::vector<TokenSpan> out;
  std::size_t p = 0;
  for (const auto &w : words) {
    out.push_back({w, p, p + w.size()});
    p += w.size() + 1;
  }
  return out;
}

TokenNode Tok(const std::string &s) { return TokenNode{0, s, 0, 1, {}}; }

TEST(GraphTest, EmptyLinearGraph) {
  const AnalysisGraph g = AnalysisGraph::Linear({});
  const auto paths = g.EnumeratePaths();
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_TRUE(paths[0].empty());
  EXPECT_TRUE(g.successors(AnalysisGraph::kStart).count(AnalysisGraph::kEnd));
}

TEST(GraphTest, LinearChain) {
  const std::vector<TokenSpan> toks{{"Hi", 0, 2}, {".", 2, 3}};
  const AnalysisGraph g = AnalysisGraph::Linear(toks);
  EXPECT_EQ(g.token_count(), 2u);
  const auto paths = g.EnumeratePaths();
  ASSERT_EQ(paths.size(), 1u);
  ASSERT_EQ(paths[0].size(), 2u);
  EXPECT_EQ(g.node(paths[0][0]).surface, "Hi");
  EXPECT_EQ(g.node(paths[0][1]).surface, ".");
  g.Validate();
}

TEST(GraphTest, OverlappingOffsetsRejected) {
  const std::vector<TokenSpan> toks{{"abc", 0, 3}, {"cde", 2, 5}};
  try {
    AnalysisGraph::Linear(toks);
    FAIL();
  } catch (const GraphError &e) {
    EXPECT_EQ(e.kind(), GraphErrc::kOverlappingOffsets);
  }
}

TEST(GraphTest, HyphenatedAlternative) {
  AnalysisGraph g = AnalysisGraph::Linear(Spans({"The", "France-England", "match"}));
  const auto path = g.FirstPath();
  const auto ids = g.AddAlternative(path[0], path[2],
                                    {Tok("France"), Tok("-"), Tok("England")});
  EXPECT_EQ(ids.size(), 3u);
  const auto paths = g.EnumeratePaths();
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(paths[0], path);
  EXPECT_EQ(paths[1].size(), 5u);
  g.Validate();
}

TEST(GraphTest, DuplicateAlternativeIsNotDeduplicated) {
  AnalysisGraph g = AnalysisGraph::Linear(Spans({"a", "b", "c"}));
  const auto p = g.FirstPath();
  g.AddAlternative(p[0], p[2], {Tok("b")});
  const auto paths = g.EnumeratePaths();
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(g.node(paths[0][1]).surface, g.node(paths[1][1]).surface);
}

TEST(GraphTest, AlternativeErrors) {
  AnalysisGraph g = AnalysisGraph::Linear(Spans({"a", "b"}));
  const auto p = g.FirstPath();
  auto kind_of = [&](std::function<void()> f) {
    try {
      f();
    } catch (const GraphError &e) {
      return e.kind();
    }
    return GraphErrc::kInvalidEdge;
  };
  EXPECT_EQ(kind_of([&] { g.AddAlternative(p[0], 77, {Tok("x")}); }),
            GraphErrc::kUnknownNode);
  EXPECT_EQ(kind_of([&] { g.AddAlternative(p[0], p[1], {}); }),
            GraphErrc::kEmptyAlternative);
  EXPECT_EQ(kind_of([&] { g.AddAlternative(p[1], p[0], {Tok("x")}); }),
            GraphErrc::kNoSubpath);
}

TEST(GraphTest, ForksMultiplyPathCounts) {
  AnalysisGraph g = AnalysisGraph::Linear(Spans({"a", "b", "c", "d", "e"}));
  const auto p = g.FirstPath();
  g.AddAlternative(AnalysisGraph::kStart, p[1], {Tok("x")});
  EXPECT_EQ(g.EnumeratePaths().size(), 2u);
  g.AddAlternative(p[2], p[4], {Tok("y"), Tok("z")});
  EXPECT_EQ(g.EnumeratePaths().size(), 4u);
  EXPECT_EQ(DfsCount(g, AnalysisGraph::kStart), 4u);
}

TEST(GraphTest, DisjointAlternativesGiveTwoToTheK) {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.Index(10);
    std::vector<std::string> words;
    for (std::size_t i = 0; i < n; ++i) words.push_back("w" + std::to_string(i));
    AnalysisGraph g = AnalysisGraph::Linear(Spans(words));
    const auto chain = g.FirstPath();
    std::vector<NodeId> full{AnalysisGraph::kStart};
    full.insert(full.end(), chain.begin(), chain.end());
    full.push_back(AnalysisGraph::kEnd);
    // Disjoint spans: replace token i (between full[i] and full[i+2]) for
    // a random subset of non-adjacent positions.
    std::size_t k = 0;
    for (std::size_t i = 0; i + 2 < full.size(); i += 2) {
      if (rng.Index(2) == 0) continue;
      g.AddAlternative(full[i], full[i + 2], {Tok("alt")});
      ++k;
    }
    const auto paths = g.EnumeratePaths();
    EXPECT_EQ(paths.size(), std::size_t{1} << k);
    EXPECT_EQ(DfsCount(g, AnalysisGraph::kStart), paths.size());
    EXPECT_TRUE(std::is_sorted(paths.begin(), paths.end()));
    g.Validate();
  }
}

TEST(GraphTest, CycleRejectedOnEdit) {
  AnalysisGraph g = AnalysisGraph::Linear(Spans({"a", "b", "c"}));
  const auto p = g.FirstPath();
  try {
    g.AddEdge(p[2], p[0]);
    FAIL();
  } catch (const GraphError &e) {
    EXPECT_EQ(e.kind(), GraphErrc::kCycleDetected);
  }
  EXPECT_THROW(g.AddEdge(p[0], p[0]), GraphError);
  EXPECT_THROW(g.AddEdge(AnalysisGraph::kEnd, p[0]), GraphError);
  g.AddEdge(p[0], p[2]);  // skip edge keeps the DAG
  EXPECT_EQ(g.EnumeratePaths().size(), 2u);
}

TEST(GraphTest, PathExplosionGuard) {
  // 14 binary forks = 16384 paths > 10000.
  std::vector<std::string> words(14, "w");
  AnalysisGraph g = AnalysisGraph::Linear(Spans(words));
  const auto chain = g.FirstPath();
  std::vector<NodeId> full{AnalysisGraph::kStart};
  full.insert(full.end(), chain.begin(), chain.end());
  full.push_back(AnalysisGraph::kEnd);
  for (std::size_t i = 0; i + 2 < full.size(); ++i)
    g.AddAlternative(full[i], full[i + 1], {Tok("v")});
  try {
    g.EnumeratePaths();
    FAIL();
  } catch (const GraphError &e) {
    EXPECT_EQ(e.kind(), GraphErrc::kPathExplosion);
  }
}

TEST(GraphTest, SelectPathDropsOffPathDependencies) {
  AnalysisGraph g = AnalysisGraph::Linear(Spans({"The", "France-England", "match"}));
  const auto path = g.FirstPath();
  const auto alt = g.AddAlternative(path[0], path[2],
                                    {Tok("France"), Tok("-"), Tok("England")});
  g.AddDependency(alt[0], alt[2], "flat");
  g.AddDependency(path[2], path[0], "det");
  g.SelectPath(path);
  EXPECT_EQ(g.EnumeratePaths().size(), 1u);
  for (const auto &e : g.dependencies()) {
    EXPECT_TRUE(e.head == AnalysisGraph::kStart || g.HasNode(e.head));
    EXPECT_TRUE(g.HasNode(e.dependent));
  }
  EXPECT_EQ(g.dependencies().size(), 1u);
  g.Validate();
}

TEST(GraphTest, DotDumpStylesEdges) {
  AnalysisGraph g = AnalysisGraph::Linear(Spans({"a", "b"}));
  const auto p = g.FirstPath();
  g.node(p[0]).annotations["upos"] = "DET";
  g.AddDependency(AnalysisGraph::kStart, p[1], "root");
  g.AddDependency(p[1], p[0], "det");
  const std::string dot = ToDot(g);
  EXPECT_NE(dot.find("digraph"), std::string::npos);
  EXPECT_NE(dot.find("upos=DET"), std::string::npos);
  EXPECT_NE(dot.find("color=red,style=dashed,label=\"det\""), std::string::npos);
  EXPECT_NE(dot.find("color=black"), std::string::npos);
}

}  // namespace
}  // namespace deplima
