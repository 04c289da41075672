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

#include "deplima/optimizer.h"

#include <cmath>
#include <string>

namespace deplima::nn {

void ZeroGrads(std::span<const Var> params) {
  for (const Var &p : params) p.node()->data.ZeroGrad();
}

void Adam::Step(std::span<const Var> params) {
  if (first_.empty()) {
    first_.resize(params.size());
    second_.resize(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
      first_[k].assign(params[k].size(), 0.0);
      second_[k].assign(params[k].size(), 0.0);
    }
  }
  if (first_.size() != params.size())
    throw NumericsError(NumericsErrc::kDimMismatch,
                        "adam: parameter list changed between steps");
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Tensor &t = params[k].tensor();
    if (!t.has_grad())
      throw NumericsError(NumericsErrc::kMissingGradient,
                          "adam: parameter " + std::to_string(k) + " " +
                              ShapeString(t.shape) + " has no gradient");
    if (t.size() != first_[k].size())
      throw NumericsError(NumericsErrc::kDimMismatch,
                          "adam: parameter " + std::to_string(k) +
                              " changed size");
  }
  double scale = 1.0;
  if (config_.clip_norm > 0.0) {
    double sq = 0.0;
    for (const Var &p : params)
      for (double g : p.tensor().grad) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm > config_.clip_norm) scale = config_.clip_norm / norm;
  }
  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double lr = config_.learning_rate;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor &t = params[k].node()->data;
    auto &m = first_[k];
    auto &v = second_[k];
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double g = t.grad[i] * scale;
      // Untouched coordinates (zero gradient, zero moments) stay put.
      if (g == 0.0 && m[i] == 0.0 && v[i] == 0.0) continue;
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      t.values[i] -= lr * mhat / (std::sqrt(vhat) + config_.epsilon);
      t.grad[i] = 0.0;
    }
  }
}

}  // namespace deplima::nn
