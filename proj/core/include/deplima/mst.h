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

#ifndef DEPLIMA_MST_H_
#define DEPLIMA_MST_H_

// Maximum spanning arborescence decoding for graph-based dependency
// parsing.

#include <cstddef>
#include <vector>

#include "deplima/tensor.h"

namespace deplima {

// Chu-Liu/Edmonds over a dense weight matrix w[h][d] for nodes 0..m-1
// rooted at node 0. Entries of -infinity are forbidden arcs; the diagonal
// and column 0 are ignored. Returns head[d] for every node (head[0] = -1),
// or an empty vector when some node cannot be reached.
std::vector<int> MaxArborescence(const std::vector<std::vector<double>> &w);

// Best tree with exactly one child of the artificial root, from a
// [n + 1, n] score matrix (row h = head, h = 0 is the root; column d is
// token d + 1). Each root child is tried in turn; ties keep the lower
// index. Returns 1-based heads with 0 = root.
std::vector<int> DecodeSingleRootTree(const nn::Tensor &scores);

// Sum of scores[head[d]][d] over dependents.
double TreeScore(const nn::Tensor &scores, const std::vector<int> &heads);

// True when heads (0 = root, 1-based) form a tree with one root child.
bool IsSingleRootTree(const std::vector<int> &heads);

}  // namespace deplima

#endif  // DEPLIMA_MST_H_
