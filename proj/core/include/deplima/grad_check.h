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

#ifndef DEPLIMA_GRAD_CHECK_H_
#define DEPLIMA_GRAD_CHECK_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "deplima/tensor.h"

namespace deplima::nn {

struct GradCheckOptions {
  double step = 1e-4;
  // Coordinates checked per call; all of them when the total is smaller.
  std::size_t max_coordinates = 300;
  std::uint64_t seed = 17;
  // Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
};

// Compares reverse-mode gradients of the scalar built by `f` against
// central differences (f(x+h) - f(x-h)) / 2h on a sample of parameter
// coordinates. Returns the maximum relative error. Parameter gradients are
// left zeroed. Throws kNonFiniteValue if f or a gradient is not finite.
double GradCheck(const std::function<Var()> &f, std::span<const Var> params,
                 const GradCheckOptions &options = {});

}  // namespace deplima::nn

#endif  // DEPLIMA_GRAD_CHECK_H_
