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

#include "deplima/graph.h"

#include <algorithm>
#include <sstream>
#include <utility>

namespace deplima {
namespace {

std::string DotEscape(const std::string &s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string TokenNode::annotation(const std::string &key,
                                  const std::string &fallback) const {
  auto it = annotations.find(key);
  return it == annotations.end() ? fallback : it->second;
}

AnalysisGraph::AnalysisGraph() {
  nodes_.resize(2);
  nodes_[kStart] = TokenNode{kStart, "", 0, 0, {}};
  nodes_[kEnd] = TokenNode{kEnd, "", 0, 0, {}};
  succ_.resize(2);
  pred_.resize(2);
  succ_[kStart].insert(kEnd);
  pred_[kEnd].insert(kStart);
}

AnalysisGraph AnalysisGraph::Linear(std::span<const TokenSpan> tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto &t = tokens[i];
    if (t.char_start >= t.char_end ||
        (i > 0 && t.char_start < tokens[i - 1].char_end)) {
      throw GraphError(GraphErrc::kOverlappingOffsets,
                       "token " + std::to_string(i) + " [" +
                           std::to_string(t.char_start) + "," +
                           std::to_string(t.char_end) +
                           ") overlaps or is out of order");
    }
  }
  AnalysisGraph g;
  if (tokens.empty()) return g;
  g.RemoveEdge(kStart, kEnd);
  NodeId prev = kStart;
  for (const auto &t : tokens) {
    const NodeId id = g.AddNode(TokenNode{0, t.surface, t.char_start, t.char_end, {}});
    g.succ_[prev].insert(id);
    g.pred_[id].insert(prev);
    prev = id;
  }
  g.succ_[prev].insert(kEnd);
  g.pred_[kEnd].insert(prev);
  return g;
}

void AnalysisGraph::RequireNode(NodeId id) const {
  if (!HasNode(id))
    throw GraphError(GraphErrc::kUnknownNode,
                     "unknown node " + std::to_string(id));
}

bool AnalysisGraph::HasNode(NodeId id) const {
  return id < nodes_.size() && nodes_[id].has_value();
}

const TokenNode &AnalysisGraph::node(NodeId id) const {
  RequireNode(id);
  return *nodes_[id];
}

TokenNode &AnalysisGraph::node(NodeId id) {
  RequireNode(id);
  return *nodes_[id];
}

std::vector<NodeId> AnalysisGraph::NodeIds() const {
  std::vector<NodeId> ids;
  for (NodeId i = 0; i < nodes_.size(); ++i)
    if (nodes_[i]) ids.push_back(i);
  return ids;
}

std::size_t AnalysisGraph::token_count() const {
  std::size_t n = 0;
  for (NodeId i = 2; i < nodes_.size(); ++i)
    if (nodes_[i]) ++n;
  return n;
}

const std::set<NodeId> &AnalysisGraph::successors(NodeId id) const {
  RequireNode(id);
  return succ_[id];
}

const std::set<NodeId> &AnalysisGraph::predecessors(NodeId id) const {
  RequireNode(id);
  return pred_[id];
}

std::set<std::pair<NodeId, NodeId>> AnalysisGraph::SequenceEdges() const {
  std::set<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < succ_.size(); ++i)
    for (NodeId j : succ_[i]) edges.emplace(i, j);
  return edges;
}

NodeId AnalysisGraph::AddNode(TokenNode node) {
  const NodeId id = static_cast<NodeId>(nodes_.size());
  node.id = id;
  nodes_.push_back(std::move(node));
  succ_.emplace_back();
  pred_.emplace_back();
  return id;
}

void AnalysisGraph::RemoveNode(NodeId id) {
  RequireNode(id);
  if (id == kStart || id == kEnd)
    throw GraphError(GraphErrc::kInvalidEdge, "cannot remove a virtual node");
  for (NodeId s : succ_[id]) pred_[s].erase(id);
  for (NodeId p : pred_[id]) succ_[p].erase(id);
  succ_[id].clear();
  pred_[id].clear();
  for (auto it = dependencies_.begin(); it != dependencies_.end();) {
    if (it->head == id || it->dependent == id)
      it = dependencies_.erase(it);
    else
      ++it;
  }
  nodes_[id].reset();
}

bool AnalysisGraph::Reaches(NodeId from, NodeId to) const {
  std::vector<NodeId> stack{from};
  std::vector<bool> seen(nodes_.size(), false);
  seen[from] = true;
  while (!stack.empty()) {
    const NodeId cur = stack.back();
    stack.pop_back();
    if (cur == to) return true;
    for (NodeId s : succ_[cur])
      if (!seen[s]) {
        seen[s] = true;
        stack.push_back(s);
      }
  }
  return false;
}

void AnalysisGraph::AddEdge(NodeId from, NodeId to) {
  RequireNode(from);
  RequireNode(to);
  if (from == to || from == kEnd || to == kStart)
    throw GraphError(GraphErrc::kInvalidEdge,
                     "invalid sequence edge " + std::to_string(from) + "->" +
                         std::to_string(to));
  if (Reaches(to, from))
    throw GraphError(GraphErrc::kCycleDetected,
                     "edge " + std::to_string(from) + "->" +
                         std::to_string(to) + " closes a cycle");
  succ_[from].insert(to);
  pred_[to].insert(from);
}

void AnalysisGraph::RemoveEdge(NodeId from, NodeId to) {
  RequireNode(from);
  RequireNode(to);
  succ_[from].erase(to);
  pred_[to].erase(from);
}

std::vector<NodeId> AnalysisGraph::AddAlternative(
    NodeId from, NodeId to, std::vector<TokenNode> alternative) {
  RequireNode(from);
  RequireNode(to);
  if (alternative.empty())
    throw GraphError(GraphErrc::kEmptyAlternative, "empty alternative");
  if (from == to || !Reaches(from, to))
    throw GraphError(GraphErrc::kNoSubpath,
                     "no subpath " + std::to_string(from) + " ~> " +
                         std::to_string(to));
  std::vector<NodeId> ids;
  NodeId prev = from;
  for (auto &t : alternative) {
    const NodeId id = AddNode(std::move(t));
    succ_[prev].insert(id);
    pred_[id].insert(prev);
    ids.push_back(id);
    prev = id;
  }
  succ_[prev].insert(to);
  pred_[to].insert(prev);
  return ids;
}

std::size_t AnalysisGraph::CountPaths(std::size_t limit) const {
  // Kahn order doubles as the cycle check.
  std::vector<std::size_t> indeg(nodes_.size(), 0);
  for (NodeId i = 0; i < nodes_.size(); ++i)
    if (nodes_[i])
      for (NodeId s : succ_[i]) ++indeg[s];
  std::vector<NodeId> order;
  std::vector<NodeId> ready;
  for (NodeId i = 0; i < nodes_.size(); ++i)
    if (nodes_[i] && indeg[i] == 0) ready.push_back(i);
  while (!ready.empty()) {
    const NodeId cur = ready.back();
    ready.pop_back();
    order.push_back(cur);
    for (NodeId s : succ_[cur])
      if (--indeg[s] == 0) ready.push_back(s);
  }
  std::size_t live = 0;
  for (const auto &n : nodes_) live += n.has_value();
  if (order.size() != live)
    throw GraphError(GraphErrc::kCycleDetected, "sequence edges contain a cycle");
  std::vector<std::size_t> count(nodes_.size(), 0);
  count[kStart] = 1;
  for (NodeId cur : order)
    for (NodeId s : succ_[cur])
      count[s] = std::min(limit + 1, count[s] + count[cur]);
  return count[kEnd];
}

std::vector<std::vector<NodeId>> AnalysisGraph::EnumeratePaths(
    std::size_t limit) const {
  const std::size_t total = CountPaths(limit);
  if (total > limit)
    throw GraphError(GraphErrc::kPathExplosion,
                     "more than " + std::to_string(limit) + " paths");
  std::vector<std::vector<NodeId>> paths;
  paths.reserve(total);
  std::vector<NodeId> current;
  // Successor sets are ordered, so DFS visits paths lexicographically.
  struct Frame {
    NodeId node;
    std::set<NodeId>::const_iterator next;
  };
  std::vector<Frame> stack{{kStart, succ_[kStart].begin()}};
  while (!stack.empty()) {
    Frame &top = stack.back();
    if (top.next == succ_[top.node].end()) {
      stack.pop_back();
      if (!current.empty() && !stack.empty()) current.pop_back();
      continue;
    }
    const NodeId s = *top.next++;
    if (s == kEnd) {
      paths.push_back(current);
      continue;
    }
    current.push_back(s);
    stack.push_back({s, succ_[s].begin()});
  }
  return paths;
}

std::vector<NodeId> AnalysisGraph::FirstPath() const {
  CountPaths();  // cycle check
  std::vector<NodeId> path;
  NodeId cur = kStart;
  while (cur != kEnd) {
    if (succ_[cur].empty())
      throw GraphError(GraphErrc::kInvalidEdge,
                       "dead end at node " + std::to_string(cur));
    // The smallest successor that still reaches END.
    NodeId chosen = kEnd;
    bool found = false;
    for (NodeId s : succ_[cur]) {
      if (s == kEnd || Reaches(s, kEnd)) {
        chosen = s;
        found = true;
        break;
      }
    }
    if (!found)
      throw GraphError(GraphErrc::kInvalidEdge,
                       "node " + std::to_string(cur) + " cannot reach END");
    if (chosen != kEnd) path.push_back(chosen);
    cur = chosen;
  }
  return path;
}

void AnalysisGraph::SelectPath(std::span<const NodeId> path) {
  NodeId prev = kStart;
  for (NodeId id : path) {
    RequireNode(id);
    if (!succ_[prev].count(id))
      throw GraphError(GraphErrc::kNoSubpath,
                       "not a path: " + std::to_string(prev) + "->" +
                           std::to_string(id));
    prev = id;
  }
  if (!succ_[prev].count(kEnd))
    throw GraphError(GraphErrc::kNoSubpath, "path does not reach END");
  std::set<NodeId> keep(path.begin(), path.end());
  for (NodeId id = 2; id < nodes_.size(); ++id)
    if (nodes_[id] && !keep.count(id)) RemoveNode(id);
  // Drop now-redundant shortcut edges so exactly the chain remains.
  for (auto &s : succ_) s.clear();
  for (auto &p : pred_) p.clear();
  prev = kStart;
  for (NodeId id : path) {
    succ_[prev].insert(id);
    pred_[id].insert(prev);
    prev = id;
  }
  succ_[prev].insert(kEnd);
  pred_[kEnd].insert(prev);
}

void AnalysisGraph::AddDependency(NodeId head, NodeId dependent,
                                  std::string deprel) {
  RequireNode(head);
  RequireNode(dependent);
  if (dependent == kStart || dependent == kEnd || head == kEnd ||
      head == dependent)
    throw GraphError(GraphErrc::kInvalidEdge,
                     "invalid dependency " + std::to_string(head) + "->" +
                         std::to_string(dependent));
  for (auto it = dependencies_.begin(); it != dependencies_.end(); ++it) {
    if (it->dependent == dependent) {
      dependencies_.erase(it);
      break;
    }
  }
  dependencies_.insert(DependencyEdge{head, dependent, std::move(deprel)});
}

std::optional<DependencyEdge> AnalysisGraph::HeadOf(NodeId dependent) const {
  for (const auto &e : dependencies_)
    if (e.dependent == dependent) return e;
  return std::nullopt;
}

void AnalysisGraph::Validate() const {
  CountPaths(SIZE_MAX - 1);
  if (!pred_[kStart].empty())
    throw GraphError(GraphErrc::kInvalidEdge, "START has predecessors");
  if (!succ_[kEnd].empty())
    throw GraphError(GraphErrc::kInvalidEdge, "END has successors");
  for (NodeId id = 2; id < nodes_.size(); ++id) {
    if (!nodes_[id]) continue;
    if (!Reaches(kStart, id) || !Reaches(id, kEnd))
      throw GraphError(GraphErrc::kNoSubpath,
                       "node " + std::to_string(id) +
                           " is not on a START -> END path");
  }
  for (const auto &e : dependencies_) {
    RequireNode(e.head);
    RequireNode(e.dependent);
  }
}

std::string ToDot(const AnalysisGraph &graph) {
  std::ostringstream os;
  os << "digraph analysis {\n  rankdir=LR;\n";
  for (NodeId id : graph.NodeIds()) {
    const TokenNode &n = graph.node(id);
    std::string label;
    if (id == AnalysisGraph::kStart) {
      label = "START";
    } else if (id == AnalysisGraph::kEnd) {
      label = "END";
    } else {
      label = n.surface;
      for (const auto &[k, v] : n.annotations) {
        if (k.rfind("sent:", 0) == 0 || k == "mwt") continue;
        label += "\n" + k + "=" + v;
      }
    }
    os << "  n" << id << " [shape=box,label=\"" << DotEscape(label) << "\"];\n";
  }
  for (const auto &[from, to] : graph.SequenceEdges())
    os << "  n" << from << " -> n" << to << " [color=black];\n";
  for (const auto &e : graph.dependencies())
    os << "  n" << e.head << " -> n" << e.dependent
       << " [color=red,style=dashed,label=\"" << DotEscape(e.deprel)
       << "\"];\n";
  os << "}\n";
  return os.str();
}

std::string SerializeGraph(const AnalysisGraph &graph) {
  std::ostringstream os;
  for (NodeId id : graph.NodeIds()) {
    const TokenNode &n = graph.node(id);
    os << "node\t" << id << '\t' << n.surface << '\t' << n.char_start << '\t'
       << n.char_end;
    for (const auto &[k, v] : n.annotations) os << '\t' << k << '=' << v;
    os << '\n';
  }
  for (const auto &[from, to] : graph.SequenceEdges())
    os << "seq\t" << from << '\t' << to << '\n';
  for (const auto &e : graph.dependencies())
    os << "dep\t" << e.head << '\t' << e.dependent << '\t' << e.deprel << '\n';
  return os.str();
}

}  // namespace deplima
