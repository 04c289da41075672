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

#ifndef DEPLIMA_GRAPH_H_
#define DEPLIMA_GRAPH_H_

// Token lattice: a DAG whose nodes are tokens, framed by two virtual nodes
// START and END. Parallel branches encode alternative tokenizations or
// interpretations; dependency edges are stored alongside the sequence
// edges. Node ids are dense integers in creation order.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "deplima/error.h"

namespace deplima {

enum class GraphErrc {
  kOverlappingOffsets,
  kUnknownNode,
  kEmptyAlternative,
  kNoSubpath,
  kCycleDetected,
  kPathExplosion,
  kInvalidEdge,
};
using GraphError = KindedError<GraphErrc>;

using NodeId = std::uint32_t;
using Annotations = std::map<std::string, std::string>;

struct TokenNode {
  NodeId id = 0;
  std::string surface;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  Annotations annotations;

  std::string annotation(const std::string &key,
                         const std::string &fallback = "") const;
};

struct TokenSpan {
  std::string surface;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
};

struct DependencyEdge {
  NodeId head = 0;  // AnalysisGraph::kStart for the sentence root
  NodeId dependent = 0;
  std::string deprel;

  auto operator<=>(const DependencyEdge &) const = default;
};

class AnalysisGraph {
 public:
  static constexpr NodeId kStart = 0;
  static constexpr NodeId kEnd = 1;
  static constexpr std::size_t kMaxPaths = 10000;

  // START -> END with no tokens.
  AnalysisGraph();

  // Single START -> t1 -> ... -> tn -> END chain. Offsets must be strictly
  // increasing and non-overlapping (kOverlappingOffsets).
  static AnalysisGraph Linear(std::span<const TokenSpan> tokens);

  // Adds a detached node; its id is returned and `node.id` is ignored.
  NodeId AddNode(TokenNode node);
  // Removes a token node and every incident edge.
  void RemoveNode(NodeId id);
  // Rejects self loops, virtual endpoints used the wrong way round, and
  // edges closing a cycle (kInvalidEdge / kCycleDetected).
  void AddEdge(NodeId from, NodeId to);
  void RemoveEdge(NodeId from, NodeId to);

  // New branch from -> alt[0] -> ... -> alt[k-1] -> to, parallel to the
  // existing from ~> to subpath. Returns the new node ids.
  std::vector<NodeId> AddAlternative(NodeId from, NodeId to,
                                     std::vector<TokenNode> alternative);

  // Every START -> END path as token-node ids (virtual nodes omitted), in
  // lexicographic order of the id sequences. Throws kCycleDetected on a
  // cyclic graph and kPathExplosion beyond `limit` paths.
  std::vector<std::vector<NodeId>> EnumeratePaths(
      std::size_t limit = kMaxPaths) const;
  std::size_t CountPaths(std::size_t limit = kMaxPaths) const;
  // The lexicographically first path.
  std::vector<NodeId> FirstPath() const;

  // Keeps only the nodes of `path` (which must be a START -> END path),
  // dropping every off-path node together with its dependency edges.
  void SelectPath(std::span<const NodeId> path);

  void AddDependency(NodeId head, NodeId dependent, std::string deprel);
  void ClearDependencies() { dependencies_.clear(); }
  // Head edge of a dependent, if any.
  std::optional<DependencyEdge> HeadOf(NodeId dependent) const;

  // DAG, START in-degree 0, END out-degree 0, every node on some
  // START -> END path, dependency endpoints exist. Throws on violation.
  void Validate() const;

  bool HasNode(NodeId id) const;
  const TokenNode &node(NodeId id) const;
  TokenNode &node(NodeId id);
  std::vector<NodeId> NodeIds() const;
  std::size_t token_count() const;  // excludes START/END

  const std::set<NodeId> &successors(NodeId id) const;
  const std::set<NodeId> &predecessors(NodeId id) const;
  std::set<std::pair<NodeId, NodeId>> SequenceEdges() const;
  const std::set<DependencyEdge> &dependencies() const { return dependencies_; }

 private:
  void RequireNode(NodeId id) const;
  bool Reaches(NodeId from, NodeId to) const;

  std::vector<std::optional<TokenNode>> nodes_;
  std::vector<std::set<NodeId>> succ_;
  std::vector<std::set<NodeId>> pred_;
  std::set<DependencyEdge> dependencies_;
};

// Debug dump in GraphViz dot syntax: solid black sequence edges, dashed red
// dependency edges labeled with the relation.
std::string ToDot(const AnalysisGraph &graph);

// Canonical line-oriented dump (nodes, sequence edges, dependencies) used
// for byte-level comparisons of analysis results.
std::string SerializeGraph(const AnalysisGraph &graph);

}  // namespace deplima

#endif  // DEPLIMA_GRAPH_H_
