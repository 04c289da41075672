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

#ifndef DEPLIMA_TENSOR_H_
#define DEPLIMA_TENSOR_H_

// Dense float64 tensors with a small reverse-mode autodiff layer. Ops
// work on whole vectors/matrices; recurrent cells and CRF terms are fused
// ops with hand-written backward passes.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "deplima/error.h"

namespace deplima {
class Rng;
}

namespace deplima::nn {

enum class NumericsErrc {
  kDimMismatch,
  kNonFiniteValue,
  kMissingGradient,
  kBadArchive,
};
using NumericsError = KindedError<NumericsErrc>;

using Shape = std::vector<std::size_t>;

std::size_t ShapeSize(const Shape &shape);
std::string ShapeString(const Shape &shape);

// Row-major values plus an optional same-shape gradient buffer. An empty
// `grad` means "no gradient yet".
struct Tensor {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0);
  Tensor(Shape s, std::vector<double> v);

  static Tensor Vector(std::vector<double> v);
  static Tensor Matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> v);
  static Tensor Scalar(double v) { return Tensor({}, {v}); }

  std::size_t size() const { return values.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t rows() const { return shape.at(0); }
  std::size_t cols() const { return shape.at(1); }
  bool has_grad() const { return grad.size() == values.size(); }

  double &at(std::size_t r, std::size_t c) { return values[r * shape[1] + c]; }
  double at(std::size_t r, std::size_t c) const {
    return values[r * shape[1] + c];
  }

  void ZeroGrad() { grad.assign(values.size(), 0.0); }
};

// Glorot-uniform initialization: U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
// For rank-1 tensors fan_in = 1 and fan_out = size.
Tensor XavierUniform(const Shape &shape, Rng &rng);

struct Node;

// Handle to a node in the autodiff graph. Copies share the node, like a
// reference; parameters are leaf Vars created with requires_grad = true.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Tensor &tensor() const;
  Tensor &tensor();
  const std::vector<double> &values() const { return tensor().values; }
  const Shape &shape() const { return tensor().shape; }
  std::size_t size() const { return tensor().size(); }
  double scalar() const;
  bool requires_grad() const;

  // Back-propagates from this scalar. Leaf gradients accumulate.
  void Backward() const;

  // Builds an interior node. Used by op implementations.
  static Var MakeResult(Tensor value, std::vector<Var> parents,
                        std::function<void(Node &)> backward);

  const std::shared_ptr<Node> &node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

struct Node {
  Tensor data;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node &)> backward;

  // Gradient buffer of parent i, allocated on first use; null when that
  // parent does not require a gradient.
  std::vector<double> *ParentGrad(std::size_t i);
  const Tensor &Parent(std::size_t i) const { return parents[i]->data; }
};

// While alive, ops on this thread record no graph (inference mode).
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope &) = delete;
  NoGradScope &operator=(const NoGradScope &) = delete;

 private:
  bool previous_;
};
bool GradRecordingEnabled();

Var Constant(Tensor value);
Var Parameter(Tensor value);

// Elementwise.
Var Add(const Var &a, const Var &b);
Var Sub(const Var &a, const Var &b);
Var Mul(const Var &a, const Var &b);
Var Scale(const Var &a, double s);
Var Tanh(const Var &a);
Var Sigmoid(const Var &a);
Var Relu(const Var &a);

// Reductions.
Var Sum(const Var &a);
Var Dot(const Var &a, const Var &b);
Var AddScalars(std::span<const Var> terms);

// Linear algebra.
Var MatVec(const Var &w, const Var &x);          // [m,n]·[n] -> [m]
Var MatVecT(const Var &m, const Var &w);         // [n,k]ᵀ·[n] -> [k]
Var MatMul(const Var &a, const Var &b);          // [m,k]·[k,n] -> [m,n]
Var MatMulNT(const Var &a, const Var &b);        // [m,k]·[n,k]ᵀ -> [m,n]
Var AddRowVector(const Var &m, const Var &v);    // [m,n] + [n] per row

// Structure.
Var Concat(std::span<const Var> parts);          // scalars and vectors
Var Stack(std::span<const Var> rows);            // k x [n] -> [k,n]
Var Row(const Var &m, std::size_t i);            // [m,n] -> [n]
Var Slice(const Var &v, std::size_t begin, std::size_t length);
Var MeanRows(const Var &table, std::span<const std::size_t> rows);
Var GatherRows(const Var &table, std::span<const std::size_t> rows);  // [k,n]
Var ConcatColumns(std::span<const Var> mats);    // [m,a],[m,b].. -> [m,a+b..]
std::vector<Var> Unstack(const Var &m);          // [m,n] -> m x [n]

// Probability.
Var Softmax(const Var &logits);
// -log softmax(logits)[target].
Var SoftmaxNll(const Var &logits, std::size_t target);
// Sum over columns j of -log softmax(S[:, j])[targets[j]], where row
// excluded[j] (if < rows) is removed from column j's support.
Var MaskedColumnNll(const Var &scores, std::span<const std::size_t> targets,
                    std::span<const std::size_t> excluded);

// Fused gated recurrent cell. wx: [3h, in], uh: [3h, h], b: [3h], gate
// order (update, reset, candidate):
//   z = σ(Wz x + Uz h + bz)      r = σ(Wr x + Ur h + br)
//   n = tanh(Wn x + Un (r ⊙ h) + bn)
//   h' = (1 - z) ⊙ h + z ⊙ n
Var GruCell(const Var &x, const Var &h, const Var &wx, const Var &uh,
            const Var &b);

}  // namespace deplima::nn

#endif  // DEPLIMA_TENSOR_H_
