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

#include "deplima/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "deplima/rng.h"

namespace deplima::nn {
namespace {

thread_local bool g_record_grad = true;

void Require(bool ok, const std::string &what) {
  if (!ok) throw NumericsError(NumericsErrc::kDimMismatch, what);
}

void RequireRank(const Var &v, std::size_t rank, const char *op) {
  Require(v.defined() && v.shape().size() == rank,
          std::string(op) + ": expected rank " + std::to_string(rank) +
              " got " + (v.defined() ? ShapeString(v.shape()) : "undefined"));
}

double LogSumExp(const double *x, std::size_t n, std::size_t stride = 1) {
  double m = -INFINITY;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, x[i * stride]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i * stride] - m);
  return m + std::log(s);
}

}  // namespace

std::size_t ShapeSize(const Shape &shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string ShapeString(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape s, double fill)
    : shape(std::move(s)), values(ShapeSize(shape), fill) {}

Tensor::Tensor(Shape s, std::vector<double> v)
    : shape(std::move(s)), values(std::move(v)) {
  Require(values.size() == ShapeSize(shape),
          "tensor: " + std::to_string(values.size()) +
              " values for shape " + ShapeString(shape));
}

Tensor Tensor::Vector(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

Tensor Tensor::Matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> v) {
  return Tensor({rows, cols}, std::move(v));
}

Tensor XavierUniform(const Shape &shape, Rng &rng) {
  Tensor t(shape);
  double fan_in = 1.0;
  double fan_out = static_cast<double>(t.size());
  if (shape.size() >= 2) {
    fan_out = static_cast<double>(shape[0]);
    fan_in = static_cast<double>(ShapeSize(shape) / shape[0]);
  }
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  for (double &v : t.values) v = rng.Uniform(-a, a);
  return t;
}

// ---------------------------------------------------------------------------
// Var / Node

Var::Var(Tensor value, bool requires_grad)
    : node_(std::make_shared<Node>()) {
  node_->data = std::move(value);
  node_->requires_grad = requires_grad;
}

const Tensor &Var::tensor() const { return node_->data; }
Tensor &Var::tensor() { return node_->data; }

double Var::scalar() const {
  Require(size() == 1, "scalar(): tensor of shape " + ShapeString(shape()));
  return values()[0];
}

bool Var::requires_grad() const { return node_ && node_->requires_grad; }

std::vector<double> *Node::ParentGrad(std::size_t i) {
  Node &p = *parents[i];
  if (!p.requires_grad) return nullptr;
  if (!p.data.has_grad()) p.data.ZeroGrad();
  return &p.data.grad;
}

Var Var::MakeResult(Tensor value, std::vector<Var> parents,
                    std::function<void(Node &)> backward) {
  Var out(std::move(value), false);
  if (!g_record_grad) return out;
  bool any = false;
  for (const Var &p : parents) any = any || p.requires_grad();
  if (!any) return out;
  out.node_->requires_grad = true;
  out.node_->parents.reserve(parents.size());
  for (Var &p : parents) out.node_->parents.push_back(std::move(p.node_));
  out.node_->backward = std::move(backward);
  return out;
}

void Var::Backward() const {
  Require(size() == 1, "Backward() needs a scalar, got " +
                           ShapeString(shape()));
  if (!node_->requires_grad) return;
  // Iterative post-order DFS gives a topological order.
  std::vector<Node *> order;
  std::unordered_set<Node *> seen;
  std::vector<std::pair<Node *, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto &[node, next] = stack.back();
    if (next < node->parents.size()) {
      Node *p = node->parents[next++].get();
      if (p->requires_grad && !p->parents.empty() && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }
  for (Node *n : order) n->data.ZeroGrad();
  node_->data.grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

NoGradScope::NoGradScope() : previous_(g_record_grad) { g_record_grad = false; }
NoGradScope::~NoGradScope() { g_record_grad = previous_; }
bool GradRecordingEnabled() { return g_record_grad; }

Var Constant(Tensor value) { return Var(std::move(value), false); }
Var Parameter(Tensor value) { return Var(std::move(value), true); }

// ---------------------------------------------------------------------------
// Elementwise

Var Add(const Var &a, const Var &b) {
  Require(a.shape() == b.shape(), "Add: " + ShapeString(a.shape()) + " vs " +
                                      ShapeString(b.shape()));
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = a.values()[i] + b.values()[i];
  return Var::MakeResult(std::move(out), {a, b}, [](Node &self) {
    const auto &g = self.data.grad;
    for (std::size_t k = 0; k < 2; ++k) {
      if (auto *pg = self.ParentGrad(k))
        for (std::size_t i = 0; i < g.size(); ++i) (*pg)[i] += g[i];
    }
  });
}

Var Sub(const Var &a, const Var &b) {
  Require(a.shape() == b.shape(), "Sub: " + ShapeString(a.shape()) + " vs " +
                                      ShapeString(b.shape()));
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = a.values()[i] - b.values()[i];
  return Var::MakeResult(std::move(out), {a, b}, [](Node &self) {
    const auto &g = self.data.grad;
    if (auto *pa = self.ParentGrad(0))
      for (std::size_t i = 0; i < g.size(); ++i) (*pa)[i] += g[i];
    if (auto *pb = self.ParentGrad(1))
      for (std::size_t i = 0; i < g.size(); ++i) (*pb)[i] -= g[i];
  });
}

Var Mul(const Var &a, const Var &b) {
  Require(a.shape() == b.shape(), "Mul: " + ShapeString(a.shape()) + " vs " +
                                      ShapeString(b.shape()));
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = a.values()[i] * b.values()[i];
  return Var::MakeResult(std::move(out), {a, b}, [](Node &self) {
    const auto &g = self.data.grad;
    const auto &av = self.Parent(0).values;
    const auto &bv = self.Parent(1).values;
    if (auto *pa = self.ParentGrad(0))
      for (std::size_t i = 0; i < g.size(); ++i) (*pa)[i] += g[i] * bv[i];
    if (auto *pb = self.ParentGrad(1))
      for (std::size_t i = 0; i < g.size(); ++i) (*pb)[i] += g[i] * av[i];
  });
}

Var Scale(const Var &a, double s) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = a.values()[i] * s;
  return Var::MakeResult(std::move(out), {a}, [s](Node &self) {
    const auto &g = self.data.grad;
    if (auto *pa = self.ParentGrad(0))
      for (std::size_t i = 0; i < g.size(); ++i) (*pa)[i] += g[i] * s;
  });
}

Var Tanh(const Var &a) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = std::tanh(a.values()[i]);
  return Var::MakeResult(std::move(out), {a}, [](Node &self) {
    const auto &g = self.data.grad;
    const auto &y = self.data.values;
    if (auto *pa = self.ParentGrad(0))
      for (std::size_t i = 0; i < g.size(); ++i)
        (*pa)[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

namespace {
double SigmoidValue(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

Var Sigmoid(const Var &a) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = SigmoidValue(a.values()[i]);
  return Var::MakeResult(std::move(out), {a}, [](Node &self) {
    const auto &g = self.data.grad;
    const auto &y = self.data.values;
    if (auto *pa = self.ParentGrad(0))
      for (std::size_t i = 0; i < g.size(); ++i)
        (*pa)[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var Relu(const Var &a) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = std::max(0.0, a.values()[i]);
  return Var::MakeResult(std::move(out), {a}, [](Node &self) {
    const auto &g = self.data.grad;
    const auto &x = self.Parent(0).values;
    if (auto *pa = self.ParentGrad(0))
      for (std::size_t i = 0; i < g.size(); ++i)
        if (x[i] > 0) (*pa)[i] += g[i];
  });
}

// ---------------------------------------------------------------------------
// Reductions

Var Sum(const Var &a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return Var::MakeResult(Tensor::Scalar(s), {a}, [](Node &self) {
    const double g = self.data.grad[0];
    if (auto *pa = self.ParentGrad(0))
      for (double &v : *pa) v += g;
  });
}

Var Dot(const Var &a, const Var &b) {
  Require(a.size() == b.size(), "Dot: " + ShapeString(a.shape()) + " vs " +
                                    ShapeString(b.shape()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
  return Var::MakeResult(Tensor::Scalar(s), {a, b}, [](Node &self) {
    const double g = self.data.grad[0];
    const auto &av = self.Parent(0).values;
    const auto &bv = self.Parent(1).values;
    if (auto *pa = self.ParentGrad(0))
      for (std::size_t i = 0; i < av.size(); ++i) (*pa)[i] += g * bv[i];
    if (auto *pb = self.ParentGrad(1))
      for (std::size_t i = 0; i < bv.size(); ++i) (*pb)[i] += g * av[i];
  });
}

Var AddScalars(std::span<const Var> terms) {
  double s = 0.0;
  for (const Var &t : terms) {
    Require(t.size() == 1, "AddScalars: non-scalar term");
    s += t.values()[0];
  }
  std::vector<Var> parents(terms.begin(), terms.end());
  return Var::MakeResult(Tensor::Scalar(s), std::move(parents), [](Node &self) {
    const double g = self.data.grad[0];
    for (std::size_t k = 0; k < self.parents.size(); ++k)
      if (auto *pg = self.ParentGrad(k)) (*pg)[0] += g;
  });
}

// ---------------------------------------------------------------------------
// Linear algebra

Var MatVec(const Var &w, const Var &x) {
  RequireRank(w, 2, "MatVec");
  RequireRank(x, 1, "MatVec");
  const std::size_t m = w.shape()[0];
  const std::size_t n = w.shape()[1];
  Require(x.size() == n, "MatVec: " + ShapeString(w.shape()) + " · " +
                             ShapeString(x.shape()));
  Tensor out({m});
  const double *wv = w.values().data();
  const double *xv = x.values().data();
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    const double *row = wv + i * n;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * xv[j];
    out.values[i] = s;
  }
  return Var::MakeResult(std::move(out), {w, x}, [m, n](Node &self) {
    const auto &g = self.data.grad;
    const auto &wv2 = self.Parent(0).values;
    const auto &xv2 = self.Parent(1).values;
    if (auto *pw = self.ParentGrad(0)) {
      for (std::size_t i = 0; i < m; ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        double *row = pw->data() + i * n;
        for (std::size_t j = 0; j < n; ++j) row[j] += gi * xv2[j];
      }
    }
    if (auto *px = self.ParentGrad(1)) {
      for (std::size_t i = 0; i < m; ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        const double *row = wv2.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) (*px)[j] += gi * row[j];
      }
    }
  });
}

Var MatVecT(const Var &m, const Var &w) {
  RequireRank(m, 2, "MatVecT");
  RequireRank(w, 1, "MatVecT");
  const std::size_t n = m.shape()[0];
  const std::size_t k = m.shape()[1];
  Require(w.size() == n, "MatVecT: " + ShapeString(m.shape()) + "ᵀ · " +
                             ShapeString(w.shape()));
  Tensor out({k});
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.values()[i];
    const double *row = m.values().data() + i * k;
    for (std::size_t j = 0; j < k; ++j) out.values[j] += wi * row[j];
  }
  return Var::MakeResult(std::move(out), {m, w}, [n, k](Node &self) {
    const auto &g = self.data.grad;
    const auto &mv = self.Parent(0).values;
    const auto &wv = self.Parent(1).values;
    if (auto *pm = self.ParentGrad(0)) {
      for (std::size_t i = 0; i < n; ++i) {
        double *row = pm->data() + i * k;
        for (std::size_t j = 0; j < k; ++j) row[j] += wv[i] * g[j];
      }
    }
    if (auto *pw = self.ParentGrad(1)) {
      for (std::size_t i = 0; i < n; ++i) {
        const double *row = mv.data() + i * k;
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += row[j] * g[j];
        (*pw)[i] += s;
      }
    }
  });
}

Var MatMul(const Var &a, const Var &b) {
  RequireRank(a, 2, "MatMul");
  RequireRank(b, 2, "MatMul");
  const std::size_t m = a.shape()[0];
  const std::size_t k = a.shape()[1];
  const std::size_t n = b.shape()[1];
  Require(b.shape()[0] == k, "MatMul: " + ShapeString(a.shape()) + " · " +
                                 ShapeString(b.shape()));
  Tensor out({m, n});
  const double *av = a.values().data();
  const double *bv = b.values().data();
  for (std::size_t i = 0; i < m; ++i) {
    double *orow = out.values.data() + i * n;
    for (std::size_t l = 0; l < k; ++l) {
      const double x = av[i * k + l];
      if (x == 0.0) continue;
      const double *brow = bv + l * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += x * brow[j];
    }
  }
  return Var::MakeResult(std::move(out), {a, b}, [m, k, n](Node &self) {
    const auto &g = self.data.grad;
    const auto &av2 = self.Parent(0).values;
    const auto &bv2 = self.Parent(1).values;
    if (auto *pa = self.ParentGrad(0)) {
      // dA = G Bᵀ
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < k; ++l) {
          double s = 0.0;
          const double *grow = g.data() + i * n;
          const double *brow = bv2.data() + l * n;
          for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
          (*pa)[i * k + l] += s;
        }
    }
    if (auto *pb = self.ParentGrad(1)) {
      // dB = Aᵀ G
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < k; ++l) {
          const double x = av2[i * k + l];
          if (x == 0.0) continue;
          const double *grow = g.data() + i * n;
          double *brow = pb->data() + l * n;
          for (std::size_t j = 0; j < n; ++j) brow[j] += x * grow[j];
        }
    }
  });
}

Var MatMulNT(const Var &a, const Var &b) {
  RequireRank(a, 2, "MatMulNT");
  RequireRank(b, 2, "MatMulNT");
  const std::size_t m = a.shape()[0];
  const std::size_t k = a.shape()[1];
  const std::size_t n = b.shape()[0];
  Require(b.shape()[1] == k, "MatMulNT: " + ShapeString(a.shape()) + " · " +
                                 ShapeString(b.shape()) + "ᵀ");
  Tensor out({m, n});
  const double *av = a.values().data();
  const double *bv = b.values().data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      const double *arow = av + i * k;
      const double *brow = bv + j * k;
      for (std::size_t l = 0; l < k; ++l) s += arow[l] * brow[l];
      out.values[i * n + j] = s;
    }
  return Var::MakeResult(std::move(out), {a, b}, [m, k, n](Node &self) {
    const auto &g = self.data.grad;
    const auto &av2 = self.Parent(0).values;
    const auto &bv2 = self.Parent(1).values;
    auto *pa = self.ParentGrad(0);
    auto *pb = self.ParentGrad(1);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double gij = g[i * n + j];
        if (gij == 0.0) continue;
        if (pa) {
          double *arow = pa->data() + i * k;
          const double *brow = bv2.data() + j * k;
          for (std::size_t l = 0; l < k; ++l) arow[l] += gij * brow[l];
        }
        if (pb) {
          double *brow = pb->data() + j * k;
          const double *arow = av2.data() + i * k;
          for (std::size_t l = 0; l < k; ++l) brow[l] += gij * arow[l];
        }
      }
  });
}

Var AddRowVector(const Var &m, const Var &v) {
  RequireRank(m, 2, "AddRowVector");
  RequireRank(v, 1, "AddRowVector");
  const std::size_t rows = m.shape()[0];
  const std::size_t cols = m.shape()[1];
  Require(v.size() == cols, "AddRowVector: " + ShapeString(m.shape()) + " + " +
                                ShapeString(v.shape()));
  Tensor out(m.shape());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out.values[i * cols + j] = m.values()[i * cols + j] + v.values()[j];
  return Var::MakeResult(std::move(out), {m, v}, [rows, cols](Node &self) {
    const auto &g = self.data.grad;
    if (auto *pm = self.ParentGrad(0))
      for (std::size_t i = 0; i < g.size(); ++i) (*pm)[i] += g[i];
    if (auto *pv = self.ParentGrad(1))
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) (*pv)[j] += g[i * cols + j];
  });
}

// ---------------------------------------------------------------------------
// Structure

Var Concat(std::span<const Var> parts) {
  std::size_t total = 0;
  for (const Var &p : parts) {
    if (p.shape().size() > 1) RequireRank(p, 1, "Concat");
    total += p.size();
  }
  Tensor out({total});
  std::vector<std::size_t> offsets;
  offsets.reserve(parts.size());
  std::size_t off = 0;
  for (const Var &p : parts) {
    offsets.push_back(off);
    std::copy(p.values().begin(), p.values().end(), out.values.begin() + off);
    off += p.size();
  }
  std::vector<Var> parents(parts.begin(), parts.end());
  return Var::MakeResult(
      std::move(out), std::move(parents),
      [offsets = std::move(offsets)](Node &self) {
        const auto &g = self.data.grad;
        for (std::size_t k = 0; k < self.parents.size(); ++k) {
          auto *pg = self.ParentGrad(k);
          if (!pg) continue;
          for (std::size_t i = 0; i < pg->size(); ++i)
            (*pg)[i] += g[offsets[k] + i];
        }
      });
}

Var Stack(std::span<const Var> rows) {
  Require(!rows.empty(), "Stack: no rows");
  const std::size_t cols = rows[0].size();
  for (const Var &r : rows) {
    RequireRank(r, 1, "Stack");
    Require(r.size() == cols, "Stack: ragged rows");
  }
  Tensor out({rows.size(), cols});
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].values().begin(), rows[i].values().end(),
              out.values.begin() + i * cols);
  std::vector<Var> parents(rows.begin(), rows.end());
  return Var::MakeResult(std::move(out), std::move(parents),
                         [cols](Node &self) {
                           const auto &g = self.data.grad;
                           for (std::size_t k = 0; k < self.parents.size();
                                ++k) {
                             auto *pg = self.ParentGrad(k);
                             if (!pg) continue;
                             for (std::size_t j = 0; j < cols; ++j)
                               (*pg)[j] += g[k * cols + j];
                           }
                         });
}

Var Row(const Var &m, std::size_t i) {
  RequireRank(m, 2, "Row");
  const std::size_t cols = m.shape()[1];
  Require(i < m.shape()[0], "Row: index " + std::to_string(i) + " of " +
                                ShapeString(m.shape()));
  Tensor out({cols});
  std::copy(m.values().begin() + i * cols, m.values().begin() + (i + 1) * cols,
            out.values.begin());
  return Var::MakeResult(std::move(out), {m}, [i, cols](Node &self) {
    const auto &g = self.data.grad;
    if (auto *pm = self.ParentGrad(0))
      for (std::size_t j = 0; j < cols; ++j) (*pm)[i * cols + j] += g[j];
  });
}

Var Slice(const Var &v, std::size_t begin, std::size_t length) {
  RequireRank(v, 1, "Slice");
  Require(begin + length <= v.size(), "Slice: out of range");
  Tensor out({length});
  std::copy(v.values().begin() + begin, v.values().begin() + begin + length,
            out.values.begin());
  return Var::MakeResult(std::move(out), {v}, [begin, length](Node &self) {
    const auto &g = self.data.grad;
    if (auto *pv = self.ParentGrad(0))
      for (std::size_t j = 0; j < length; ++j) (*pv)[begin + j] += g[j];
  });
}

Var MeanRows(const Var &table, std::span<const std::size_t> rows) {
  RequireRank(table, 2, "MeanRows");
  Require(!rows.empty(), "MeanRows: no rows");
  const std::size_t cols = table.shape()[1];
  Tensor out({cols});
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (std::size_t r : rows) {
    Require(r < table.shape()[0], "MeanRows: row out of range");
    for (std::size_t j = 0; j < cols; ++j)
      out.values[j] += table.values()[r * cols + j];
  }
  for (double &x : out.values) x *= inv;
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return Var::MakeResult(std::move(out), {table},
                         [idx = std::move(idx), cols, inv](Node &self) {
                           const auto &g = self.data.grad;
                           auto *pt = self.ParentGrad(0);
                           if (!pt) return;
                           for (std::size_t r : idx)
                             for (std::size_t j = 0; j < cols; ++j)
                               (*pt)[r * cols + j] += g[j] * inv;
                         });
}

Var GatherRows(const Var &table, std::span<const std::size_t> rows) {
  RequireRank(table, 2, "GatherRows");
  const std::size_t cols = table.shape()[1];
  Tensor out({rows.size(), cols});
  for (std::size_t k = 0; k < rows.size(); ++k) {
    Require(rows[k] < table.shape()[0], "GatherRows: row out of range");
    std::copy(table.values().begin() + rows[k] * cols,
              table.values().begin() + (rows[k] + 1) * cols,
              out.values.begin() + k * cols);
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return Var::MakeResult(std::move(out), {table},
                         [idx = std::move(idx), cols](Node &self) {
                           const auto &g = self.data.grad;
                           auto *pt = self.ParentGrad(0);
                           if (!pt) return;
                           for (std::size_t k = 0; k < idx.size(); ++k)
                             for (std::size_t j = 0; j < cols; ++j)
                               (*pt)[idx[k] * cols + j] += g[k * cols + j];
                         });
}

Var ConcatColumns(std::span<const Var> mats) {
  Require(!mats.empty(), "ConcatColumns: no inputs");
  const std::size_t rows = mats[0].shape().at(0);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var &m : mats) {
    RequireRank(m, 2, "ConcatColumns");
    Require(m.shape()[0] == rows, "ConcatColumns: row count mismatch");
    widths.push_back(m.shape()[1]);
    total += m.shape()[1];
  }
  Tensor out({rows, total});
  std::size_t off = 0;
  for (std::size_t k = 0; k < mats.size(); ++k) {
    const auto &v = mats[k].values();
    for (std::size_t i = 0; i < rows; ++i)
      std::copy(v.begin() + i * widths[k], v.begin() + (i + 1) * widths[k],
                out.values.begin() + i * total + off);
    off += widths[k];
  }
  std::vector<Var> parents(mats.begin(), mats.end());
  return Var::MakeResult(
      std::move(out), std::move(parents),
      [widths = std::move(widths), rows, total](Node &self) {
        const auto &g = self.data.grad;
        std::size_t off = 0;
        for (std::size_t k = 0; k < widths.size(); ++k) {
          if (auto *pg = self.ParentGrad(k))
            for (std::size_t i = 0; i < rows; ++i)
              for (std::size_t j = 0; j < widths[k]; ++j)
                (*pg)[i * widths[k] + j] += g[i * total + off + j];
          off += widths[k];
        }
      });
}

std::vector<Var> Unstack(const Var &m) {
  RequireRank(m, 2, "Unstack");
  std::vector<Var> out;
  out.reserve(m.shape()[0]);
  for (std::size_t i = 0; i < m.shape()[0]; ++i) out.push_back(Row(m, i));
  return out;
}

// ---------------------------------------------------------------------------
// Probability

Var Softmax(const Var &logits) {
  RequireRank(logits, 1, "Softmax");
  const std::size_t n = logits.size();
  Tensor out({n});
  const double lse = LogSumExp(logits.values().data(), n);
  for (std::size_t i = 0; i < n; ++i)
    out.values[i] = std::exp(logits.values()[i] - lse);
  return Var::MakeResult(std::move(out), {logits}, [n](Node &self) {
    const auto &g = self.data.grad;
    const auto &y = self.data.values;
    auto *px = self.ParentGrad(0);
    if (!px) return;
    double gy = 0.0;
    for (std::size_t i = 0; i < n; ++i) gy += g[i] * y[i];
    for (std::size_t i = 0; i < n; ++i) (*px)[i] += y[i] * (g[i] - gy);
  });
}

Var SoftmaxNll(const Var &logits, std::size_t target) {
  RequireRank(logits, 1, "SoftmaxNll");
  const std::size_t n = logits.size();
  Require(target < n, "SoftmaxNll: target out of range");
  const double lse = LogSumExp(logits.values().data(), n);
  const double loss = lse - logits.values()[target];
  return Var::MakeResult(Tensor::Scalar(loss), {logits},
                         [n, target, lse](Node &self) {
                           const double g = self.data.grad[0];
                           auto *px = self.ParentGrad(0);
                           if (!px) return;
                           const auto &x = self.Parent(0).values;
                           for (std::size_t i = 0; i < n; ++i)
                             (*px)[i] += g * std::exp(x[i] - lse);
                           (*px)[target] -= g;
                         });
}

Var MaskedColumnNll(const Var &scores, std::span<const std::size_t> targets,
                    std::span<const std::size_t> excluded) {
  RequireRank(scores, 2, "MaskedColumnNll");
  const std::size_t rows = scores.shape()[0];
  const std::size_t cols = scores.shape()[1];
  Require(targets.size() == cols && excluded.size() == cols,
          "MaskedColumnNll: one target per column");
  const auto &s = scores.values();
  std::vector<double> lse(cols);
  double loss = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    Require(targets[j] < rows && targets[j] != excluded[j],
            "MaskedColumnNll: bad target");
    double m = -INFINITY;
    for (std::size_t i = 0; i < rows; ++i)
      if (i != excluded[j]) m = std::max(m, s[i * cols + j]);
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
      if (i != excluded[j]) acc += std::exp(s[i * cols + j] - m);
    lse[j] = m + std::log(acc);
    loss += lse[j] - s[targets[j] * cols + j];
  }
  std::vector<std::size_t> tgt(targets.begin(), targets.end());
  std::vector<std::size_t> exc(excluded.begin(), excluded.end());
  return Var::MakeResult(
      Tensor::Scalar(loss), {scores},
      [rows, cols, lse = std::move(lse), tgt = std::move(tgt),
       exc = std::move(exc)](Node &self) {
        const double g = self.data.grad[0];
        auto *ps = self.ParentGrad(0);
        if (!ps) return;
        const auto &sv = self.Parent(0).values;
        for (std::size_t j = 0; j < cols; ++j) {
          for (std::size_t i = 0; i < rows; ++i) {
            if (i == exc[j]) continue;
            (*ps)[i * cols + j] += g * std::exp(sv[i * cols + j] - lse[j]);
          }
          (*ps)[tgt[j] * cols + j] -= g;
        }
      });
}

// ---------------------------------------------------------------------------
// Gated recurrent cell

Var GruCell(const Var &x, const Var &h, const Var &wx, const Var &uh,
            const Var &b) {
  RequireRank(x, 1, "GruCell");
  RequireRank(h, 1, "GruCell");
  RequireRank(wx, 2, "GruCell");
  RequireRank(uh, 2, "GruCell");
  const std::size_t hd = h.size();
  const std::size_t in = x.size();
  Require(wx.shape()[0] == 3 * hd && wx.shape()[1] == in,
          "GruCell: wx " + ShapeString(wx.shape()) + " for input " +
              std::to_string(in) + ", hidden " + std::to_string(hd));
  Require(uh.shape()[0] == 3 * hd && uh.shape()[1] == hd,
          "GruCell: uh " + ShapeString(uh.shape()));
  Require(b.size() == 3 * hd, "GruCell: bias " + ShapeString(b.shape()));

  const double *xv = x.values().data();
  const double *hv = h.values().data();
  const double *wv = wx.values().data();
  const double *uv = uh.values().data();
  const double *bv = b.values().data();

  // a = Wx x + b (all three gates).
  std::vector<double> a(3 * hd);
  for (std::size_t i = 0; i < 3 * hd; ++i) {
    double s = bv[i];
    const double *row = wv + i * in;
    for (std::size_t j = 0; j < in; ++j) s += row[j] * xv[j];
    a[i] = s;
  }
  std::vector<double> z(hd), r(hd), n(hd), rh(hd);
  for (std::size_t i = 0; i < hd; ++i) {
    double sz = a[i];
    double sr = a[hd + i];
    const double *uz = uv + i * hd;
    const double *ur = uv + (hd + i) * hd;
    for (std::size_t j = 0; j < hd; ++j) {
      sz += uz[j] * hv[j];
      sr += ur[j] * hv[j];
    }
    z[i] = SigmoidValue(sz);
    r[i] = SigmoidValue(sr);
  }
  for (std::size_t j = 0; j < hd; ++j) rh[j] = r[j] * hv[j];
  Tensor out({hd});
  for (std::size_t i = 0; i < hd; ++i) {
    double sn = a[2 * hd + i];
    const double *un = uv + (2 * hd + i) * hd;
    for (std::size_t j = 0; j < hd; ++j) sn += un[j] * rh[j];
    n[i] = std::tanh(sn);
    out.values[i] = (1.0 - z[i]) * hv[i] + z[i] * n[i];
  }
  if (!GradRecordingEnabled())
    return Var(std::move(out), false);

  return Var::MakeResult(
      std::move(out), {x, h, wx, uh, b},
      [hd, in, z = std::move(z), r = std::move(r), n = std::move(n),
       rh = std::move(rh)](Node &self) {
        const auto &g = self.data.grad;
        const auto &xv2 = self.Parent(0).values;
        const auto &hv2 = self.Parent(1).values;
        const auto &wv2 = self.Parent(2).values;
        const auto &uv2 = self.Parent(3).values;

        std::vector<double> dpre(3 * hd);
        std::vector<double> dh(hd);
        for (std::size_t i = 0; i < hd; ++i) {
          const double dz = g[i] * (n[i] - hv2[i]);
          const double dn = g[i] * z[i];
          dh[i] = g[i] * (1.0 - z[i]);
          dpre[i] = dz * z[i] * (1.0 - z[i]);
          dpre[2 * hd + i] = dn * (1.0 - n[i] * n[i]);
        }
        // Through the candidate: d(r⊙h) = Unᵀ dpre_n.
        std::vector<double> drh(hd, 0.0);
        for (std::size_t i = 0; i < hd; ++i) {
          const double d = dpre[2 * hd + i];
          if (d == 0.0) continue;
          const double *un = uv2.data() + (2 * hd + i) * hd;
          for (std::size_t j = 0; j < hd; ++j) drh[j] += un[j] * d;
        }
        for (std::size_t j = 0; j < hd; ++j) {
          const double dr = drh[j] * hv2[j];
          dh[j] += drh[j] * r[j];
          dpre[hd + j] = dr * r[j] * (1.0 - r[j]);
        }
        // Recurrent gate contributions to dh.
        for (std::size_t i = 0; i < hd; ++i) {
          const double dzi = dpre[i];
          const double dri = dpre[hd + i];
          const double *uz = uv2.data() + i * hd;
          const double *ur = uv2.data() + (hd + i) * hd;
          for (std::size_t j = 0; j < hd; ++j)
            dh[j] += uz[j] * dzi + ur[j] * dri;
        }
        if (auto *pw = self.ParentGrad(2)) {
          for (std::size_t i = 0; i < 3 * hd; ++i) {
            const double d = dpre[i];
            if (d == 0.0) continue;
            double *row = pw->data() + i * in;
            for (std::size_t j = 0; j < in; ++j) row[j] += d * xv2[j];
          }
        }
        if (auto *px = self.ParentGrad(0)) {
          for (std::size_t i = 0; i < 3 * hd; ++i) {
            const double d = dpre[i];
            if (d == 0.0) continue;
            const double *row = wv2.data() + i * in;
            for (std::size_t j = 0; j < in; ++j) (*px)[j] += d * row[j];
          }
        }
        if (auto *pu = self.ParentGrad(3)) {
          for (std::size_t i = 0; i < hd; ++i) {
            double *uz = pu->data() + i * hd;
            double *ur = pu->data() + (hd + i) * hd;
            double *un = pu->data() + (2 * hd + i) * hd;
            for (std::size_t j = 0; j < hd; ++j) {
              uz[j] += dpre[i] * hv2[j];
              ur[j] += dpre[hd + i] * hv2[j];
              un[j] += dpre[2 * hd + i] * rh[j];
            }
          }
        }
        if (auto *pb = self.ParentGrad(4))
          for (std::size_t i = 0; i < 3 * hd; ++i) (*pb)[i] += dpre[i];
        if (auto *ph = self.ParentGrad(1))
          for (std::size_t j = 0; j < hd; ++j) (*ph)[j] += dh[j];
      });
}

}  // namespace deplima::nn
