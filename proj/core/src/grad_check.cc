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

#include "deplima/grad_check.h"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "deplima/optimizer.h"
#include "deplima/rng.h"

namespace deplima::nn {
namespace {

double Evaluate(const std::function<Var()> &f) {
  NoGradScope no_grad;
  const double v = f().scalar();
  if (!std::isfinite(v))
    throw NumericsError(NumericsErrc::kNonFiniteValue,
                        "grad_check: non-finite function value");
  return v;
}

}  // namespace

double GradCheck(const std::function<Var()> &f, std::span<const Var> params,
                 const GradCheckOptions &options) {
  ZeroGrads(params);
  const Var loss = f();
  if (!std::isfinite(loss.scalar()))
    throw NumericsError(NumericsErrc::kNonFiniteValue,
                        "grad_check: non-finite function value");
  loss.Backward();

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t p = 0; p < params.size(); ++p)
    for (std::size_t i = 0; i < params[p].size(); ++i) coords.emplace_back(p, i);
  if (coords.size() > options.max_coordinates) {
    Rng rng(options.seed);
    rng.Shuffle(coords);
    coords.resize(options.max_coordinates);
    std::sort(coords.begin(), coords.end());
  }

  double worst = 0.0;
  const double h = options.step;
  for (const auto &[p, i] : coords) {
    Tensor &t = params[p].node()->data;
    const double analytic = t.grad[i];
    if (!std::isfinite(analytic))
      throw NumericsError(NumericsErrc::kNonFiniteValue,
                          "grad_check: non-finite gradient");
    const double saved = t.values[i];
    t.values[i] = saved + h;
    const double up = Evaluate(f);
    t.values[i] = saved - h;
    const double down = Evaluate(f);
    t.values[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom =
        std::max({std::abs(analytic), std::abs(numeric), options.floor});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  }
  ZeroGrads(params);
  return worst;
}

}  // namespace deplima::nn
