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

#include "deplima/mst.h"

#include <limits>

namespace deplima {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Finds a cycle in the head assignment; returns its nodes or empty.
std::vector<int> FindCycle(const std::vector<int> &head) {
  const int m = static_cast<int>(head.size());
  std::vector<int> mark(m, -1);
  for (int start = 1; start < m; ++start) {
    int v = start;
    while (v > 0 && mark[v] == -1) {
      mark[v] = start;
      v = head[v];
    }
    if (v > 0 && mark[v] == start) {
      std::vector<int> cycle{v};
      for (int u = head[v]; u != v; u = head[u]) cycle.push_back(u);
      return cycle;
    }
  }
  return {};
}

}  // namespace

std::vector<int> MaxArborescence(const std::vector<std::vector<double>> &w) {
  const int m = static_cast<int>(w.size());
  std::vector<int> head(m, -1);
  for (int d = 1; d < m; ++d) {
    double best = kNegInf;
    for (int h = 0; h < m; ++h) {
      if (h != d && w[h][d] > best) {
        best = w[h][d];
        head[d] = h;
      }
    }
    if (head[d] < 0) return {};
  }
  const std::vector<int> cycle = FindCycle(head);
  if (cycle.empty()) return head;

  // Contract the cycle into one node c = last index of the reduced graph.
  std::vector<bool> in_cycle(m, false);
  for (int v : cycle) in_cycle[v] = true;
  std::vector<int> to_new(m, -1), to_old;
  for (int v = 0; v < m; ++v) {
    if (!in_cycle[v]) {
      to_new[v] = static_cast<int>(to_old.size());
      to_old.push_back(v);
    }
  }
  const int c = static_cast<int>(to_old.size());
  const int mr = c + 1;
  std::vector<std::vector<double>> wr(mr, std::vector<double>(mr, kNegInf));
  std::vector<int> enter(mr, -1);  // cycle node entered from outside node
  std::vector<int> leave(mr, -1);  // cycle node an arc to outside leaves from
  for (int h = 0; h < m; ++h) {
    for (int d = 1; d < m; ++d) {
      if (h == d || w[h][d] == kNegInf) continue;
      if (!in_cycle[h] && !in_cycle[d]) {
        wr[to_new[h]][to_new[d]] = w[h][d];
      } else if (!in_cycle[h] && in_cycle[d]) {
        const double s = w[h][d] - w[head[d]][d];
        if (s > wr[to_new[h]][c]) {
          wr[to_new[h]][c] = s;
          enter[to_new[h]] = d;
        }
      } else if (in_cycle[h] && !in_cycle[d]) {
        if (w[h][d] > wr[c][to_new[d]]) {
          wr[c][to_new[d]] = w[h][d];
          leave[to_new[d]] = h;
        }
      }
    }
  }
  const std::vector<int> reduced = MaxArborescence(wr);
  if (reduced.empty()) return {};

  std::vector<int> out(m, -1);
  for (int v : cycle) out[v] = head[v];
  for (int dn = 1; dn < mr; ++dn) {
    const int hn = reduced[dn];
    if (dn == c) {
      out[enter[hn]] = to_old[hn];
    } else {
      out[to_old[dn]] = hn == c ? leave[dn] : to_old[hn];
    }
  }
  return out;
}

std::vector<int> DecodeSingleRootTree(const nn::Tensor &scores) {
  const std::size_t n = scores.cols();
  std::vector<std::vector<double>> w(n + 1, std::vector<double>(n + 1, kNegInf));
  for (std::size_t h = 0; h <= n; ++h) {
    for (std::size_t d = 1; d <= n; ++d) {
      if (h != d) w[h][d] = scores.at(h, d - 1);
    }
  }
  std::vector<int> best;
  double best_score = kNegInf;
  for (std::size_t r = 1; r <= n; ++r) {
    std::vector<std::vector<double>> wr = w;
    for (std::size_t d = 1; d <= n; ++d) {
      if (d != r) wr[0][d] = kNegInf;
    }
    std::vector<int> tree = MaxArborescence(wr);
    if (tree.empty()) continue;
    std::vector<int> heads(tree.begin() + 1, tree.end());
    const double s = TreeScore(scores, heads);
    if (best.empty() || s > best_score) {
      best = std::move(heads);
      best_score = s;
    }
  }
  return best;
}

double TreeScore(const nn::Tensor &scores, const std::vector<int> &heads) {
  double s = 0.0;
  for (std::size_t d = 0; d < heads.size(); ++d) s += scores.at(heads[d], d);
  return s;
}

bool IsSingleRootTree(const std::vector<int> &heads) {
  const int n = static_cast<int>(heads.size());
  int roots = 0;
  for (int d = 0; d < n; ++d) {
    if (heads[d] < 0 || heads[d] > n || heads[d] == d + 1) return false;
    roots += heads[d] == 0;
  }
  if (roots != 1) return false;
  for (int d = 1; d <= n; ++d) {
    int v = d;
    for (int steps = 0; v != 0; ++steps) {
      if (steps > n) return false;
      v = heads[v - 1];
    }
  }
  return true;
}

}  // namespace deplima
