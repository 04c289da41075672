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

#ifndef DEPLIMA_CRF_H_
#define DEPLIMA_CRF_H_

// Linear-chain CRF over emissions [n, L] and transitions [L, L]. A path
// y scores Σ_t E[t, y_t] + Σ_{t>0} T[y_{t-1}, y_t]; there are no separate
// start/stop scores.

#include <cstddef>
#include <span>
#include <vector>

#include "deplima/tensor.h"

namespace deplima::nn {

struct CrfParams {
  Var transitions;  // [L, L]
  std::size_t labels() const { return transitions.shape().at(0); }
};

CrfParams MakeCrf(std::size_t labels, Rng &rng);

double CrfPathScore(const Tensor &emissions, const Tensor &transitions,
                    std::span<const std::size_t> labels);

// log Σ_y exp(score(y)).
double CrfLogPartition(const Tensor &emissions, const Tensor &transitions);

// Maximum-scoring path. Ties resolve toward the lowest label index at every
// backtrack step (the final label first, then each backpointer).
std::vector<std::size_t> ViterbiDecode(const Tensor &emissions,
                                       const Tensor &transitions);

// Per-position posterior marginals [n, L] by forward-backward.
Tensor CrfMarginals(const Tensor &emissions, const Tensor &transitions);

// Differentiable counterparts.
Var CrfLogPartition(const Var &emissions, const Var &transitions);
Var CrfPathScore(const Var &emissions, const Var &transitions,
                 std::span<const std::size_t> labels);
// log Z - score(gold).
Var CrfNll(const Var &emissions, const Var &transitions,
           std::span<const std::size_t> gold);
// Posterior marginals as a differentiable [n, L] node. The backward pass is
// a Hessian-vector product of log Z, computed by forward-mode (dual number)
// forward-backward.
Var CrfMarginals(const Var &emissions, const Var &transitions);

}  // namespace deplima::nn

#endif  // DEPLIMA_CRF_H_
