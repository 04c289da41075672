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

#include "deplima/rnn.h"

#include <string>

#include "deplima/rng.h"

namespace deplima::nn {

GruParams MakeGru(std::size_t input_dim, std::size_t hidden_dim, Rng &rng) {
  GruParams p;
  p.wx = Parameter(XavierUniform({3 * hidden_dim, input_dim}, rng));
  p.uh = Parameter(XavierUniform({3 * hidden_dim, hidden_dim}, rng));
  p.b = Parameter(Tensor({3 * hidden_dim}));
  return p;
}

GruParams ZeroGru(std::size_t input_dim, std::size_t hidden_dim) {
  GruParams p;
  p.wx = Parameter(Tensor({3 * hidden_dim, input_dim}));
  p.uh = Parameter(Tensor({3 * hidden_dim, hidden_dim}));
  p.b = Parameter(Tensor({3 * hidden_dim}));
  return p;
}

std::vector<Var> RunGru(const GruParams &params, std::span<const Var> inputs,
                        bool reverse) {
  const std::size_t n = inputs.size();
  std::vector<Var> states(n);
  Var h = Constant(Tensor({params.hidden_dim()}));
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reverse ? n - 1 - k : k;
    h = GruCell(inputs[t], h, params.wx, params.uh, params.b);
    states[t] = h;
  }
  return states;
}

Var GruFinalState(const GruParams &params, std::span<const Var> inputs) {
  Var h = Constant(Tensor({params.hidden_dim()}));
  for (const Var &x : inputs) h = GruCell(x, h, params.wx, params.uh, params.b);
  return h;
}

std::vector<Var> BiRnnParams::Parameters() const {
  std::vector<Var> out = forward.Parameters();
  for (const Var &v : backward.Parameters()) out.push_back(v);
  return out;
}

BiRnnParams MakeBiRnn(std::size_t input_dim, std::size_t hidden_dim, Rng &rng) {
  BiRnnParams p;
  p.forward = MakeGru(input_dim, hidden_dim, rng);
  p.backward = MakeGru(input_dim, hidden_dim, rng);
  return p;
}

std::vector<Var> BiRnnForward(const BiRnnParams &params,
                              std::span<const Var> inputs) {
  if (inputs.empty())
    throw NumericsError(NumericsErrc::kDimMismatch, "birnn: empty input");
  for (const Var &x : inputs) {
    if (x.shape().size() != 1 || x.size() != params.input_dim())
      throw NumericsError(NumericsErrc::kDimMismatch,
                          "birnn: input " + ShapeString(x.shape()) +
                              ", expected [" +
                              std::to_string(params.input_dim()) + "]");
  }
  const auto fw = RunGru(params.forward, inputs, false);
  const auto bw = RunGru(params.backward, inputs, true);
  std::vector<Var> out(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const Var parts[] = {fw[t], bw[t]};
    out[t] = Concat(parts);
  }
  return out;
}

void PutGru(ModelArchive &archive, const std::string &prefix, const GruParams &p) {
  archive.PutVar(prefix + "/wx", p.wx);
  archive.PutVar(prefix + "/uh", p.uh);
  archive.PutVar(prefix + "/b", p.b);
}

GruParams GetGru(const ModelArchive &archive, const std::string &prefix) {
  const Tensor &uh = archive.GetTensor(prefix + "/uh");
  const Tensor &wx = archive.GetTensor(prefix + "/wx");
  if (uh.rank() != 2 || wx.rank() != 2 || uh.rows() != 3 * uh.cols())
    throw NumericsError(NumericsErrc::kBadArchive, "bad recurrent cell " + prefix);
  const std::size_t h = uh.cols();
  GruParams p;
  p.wx = archive.GetParameter(prefix + "/wx", {3 * h, wx.cols()});
  p.uh = archive.GetParameter(prefix + "/uh", {3 * h, h});
  p.b = archive.GetParameter(prefix + "/b", {3 * h});
  return p;
}

void PutBiRnn(ModelArchive &archive, const std::string &prefix, const BiRnnParams &p) {
  PutGru(archive, prefix + "/fw", p.forward);
  PutGru(archive, prefix + "/bw", p.backward);
}

BiRnnParams GetBiRnn(const ModelArchive &archive, const std::string &prefix) {
  BiRnnParams p{GetGru(archive, prefix + "/fw"), GetGru(archive, prefix + "/bw")};
  if (p.forward.input_dim() != p.backward.input_dim() ||
      p.forward.hidden_dim() != p.backward.hidden_dim())
    throw NumericsError(NumericsErrc::kBadArchive, "mismatched directions in " + prefix);
  return p;
}

Var ProjectRows(const Var &rows, const Var &w, const Var &bias) {
  Var out = MatMul(rows, w);
  if (bias.defined()) out = AddRowVector(out, bias);
  return out;
}

}  // namespace deplima::nn
