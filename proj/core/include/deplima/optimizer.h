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

#ifndef DEPLIMA_OPTIMIZER_H_
#define DEPLIMA_OPTIMIZER_H_

#include <cstddef>
#include <span>
#include <vector>

#include "deplima/tensor.h"

namespace deplima::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Global L2 norm clip applied to the gradient before the update; <= 0
  // disables clipping.
  double clip_norm = 0.0;
};

// Adaptive-moment optimizer. Moments are created lazily, one per parameter
// in the order of the first Step() call; later calls must pass the same
// parameter list.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Applies one update and zeroes the gradients. Every parameter must
  // carry a gradient buffer (kMissingGradient otherwise).
  void Step(std::span<const Var> params);

  std::size_t steps() const { return steps_; }
  const AdamConfig &config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

 private:
  AdamConfig config_;
  std::size_t steps_ = 0;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
};

// Allocates zeroed gradient buffers on every parameter.
void ZeroGrads(std::span<const Var> params);

}  // namespace deplima::nn

#endif  // DEPLIMA_OPTIMIZER_H_
