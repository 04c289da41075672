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

#ifndef DEPLIMA_RNN_H_
#define DEPLIMA_RNN_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "deplima/archive.h"
#include "deplima/tensor.h"

namespace deplima::nn {

// One direction of a gated recurrent layer (see GruCell for the formulas).
struct GruParams {
  Var wx;  // [3h, in]
  Var uh;  // [3h, h]
  Var b;   // [3h]

  std::size_t input_dim() const { return wx.shape().at(1); }
  std::size_t hidden_dim() const { return uh.shape().at(1); }
  std::vector<Var> Parameters() const { return {wx, uh, b}; }
};

GruParams MakeGru(std::size_t input_dim, std::size_t hidden_dim, Rng &rng);
GruParams ZeroGru(std::size_t input_dim, std::size_t hidden_dim);

// Runs the cell left to right from a zero state; returns every state.
std::vector<Var> RunGru(const GruParams &params, std::span<const Var> inputs,
                        bool reverse = false);
// Final state only (zero vector for an empty sequence).
Var GruFinalState(const GruParams &params, std::span<const Var> inputs);

struct BiRnnParams {
  GruParams forward;
  GruParams backward;

  std::size_t input_dim() const { return forward.input_dim(); }
  std::size_t hidden_dim() const { return forward.hidden_dim(); }
  std::size_t output_dim() const { return 2 * hidden_dim(); }
  std::vector<Var> Parameters() const;
};

BiRnnParams MakeBiRnn(std::size_t input_dim, std::size_t hidden_dim, Rng &rng);

// Output t = [forward state after inputs[0..t] ; backward state after
// inputs[t..n-1] read right to left]. Throws kDimMismatch on an empty
// sequence or a wrongly sized input.
std::vector<Var> BiRnnForward(const BiRnnParams &params,
                              std::span<const Var> inputs);

// Archive records "<prefix>/wx", "<prefix>/uh", "<prefix>/b" (and
// "<prefix>/fw/..", "<prefix>/bw/.." for the bidirectional layer).
void PutGru(ModelArchive &archive, const std::string &prefix, const GruParams &p);
GruParams GetGru(const ModelArchive &archive, const std::string &prefix);
void PutBiRnn(ModelArchive &archive, const std::string &prefix, const BiRnnParams &p);
BiRnnParams GetBiRnn(const ModelArchive &archive, const std::string &prefix);

// Affine map applied to each row: [n, in] -> [n, out] with w: [in, out].
Var ProjectRows(const Var &rows, const Var &w, const Var &bias = Var());

}  // namespace deplima::nn

#endif  // DEPLIMA_RNN_H_
