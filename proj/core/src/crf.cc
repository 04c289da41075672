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

#include "deplima/crf.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "deplima/rng.h"

namespace deplima::nn {
namespace {

void CheckShapes(const Tensor &e, const Tensor &t) {
  if (e.rank() != 2 || t.rank() != 2 || e.rows() == 0 || e.cols() == 0 ||
      t.rows() != e.cols() || t.cols() != e.cols()) {
    throw NumericsError(NumericsErrc::kDimMismatch,
                        "crf: emissions " + ShapeString(e.shape) +
                            " with transitions " + ShapeString(t.shape));
  }
}

// Scalar carrying a directional derivative alongside its value.
struct Dual {
  double v = 0.0;
  double d = 0.0;
};

inline double Val(double x) { return x; }
inline double Val(const Dual &x) { return x.v; }

inline double Plus(double a, double b) { return a + b; }
inline Dual Plus(const Dual &a, const Dual &b) { return {a.v + b.v, a.d + b.d}; }

double Lse(const double *x, std::size_t n) {
  double m = -INFINITY;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, x[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i] - m);
  return m + std::log(s);
}

Dual Lse(const Dual *x, std::size_t n) {
  double m = -INFINITY;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, x[i].v);
  double s = 0.0;
  double sd = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(x[i].v - m);
    s += w;
    sd += w * x[i].d;
  }
  return {m + std::log(s), sd / s};
}

// Log-space forward-backward over an arbitrary scalar type.
template <typename S>
struct Lattice {
  std::size_t n = 0;
  std::size_t labels = 0;
  std::vector<S> alpha;  // [n, L]
  std::vector<S> beta;   // [n, L]
  S log_z{};
};

template <typename S>
Lattice<S> ForwardBackward(const std::vector<S> &e, const std::vector<S> &t,
                           std::size_t n, std::size_t labels) {
  Lattice<S> lat;
  lat.n = n;
  lat.labels = labels;
  lat.alpha.resize(n * labels);
  lat.beta.resize(n * labels);
  std::vector<S> buf(labels);
  for (std::size_t j = 0; j < labels; ++j) lat.alpha[j] = e[j];
  for (std::size_t p = 1; p < n; ++p)
    for (std::size_t j = 0; j < labels; ++j) {
      for (std::size_t i = 0; i < labels; ++i)
        buf[i] = Plus(lat.alpha[(p - 1) * labels + i], t[i * labels + j]);
      lat.alpha[p * labels + j] = Plus(Lse(buf.data(), labels), e[p * labels + j]);
    }
  for (std::size_t j = 0; j < labels; ++j) lat.beta[(n - 1) * labels + j] = S{};
  for (std::size_t p = n - 1; p-- > 0;)
    for (std::size_t i = 0; i < labels; ++i) {
      for (std::size_t j = 0; j < labels; ++j)
        buf[j] = Plus(Plus(t[i * labels + j], e[(p + 1) * labels + j]),
                      lat.beta[(p + 1) * labels + j]);
      lat.beta[p * labels + i] = Lse(buf.data(), labels);
    }
  lat.log_z = Lse(lat.alpha.data() + (n - 1) * labels, labels);
  return lat;
}

// Marginals μ[p, j] and summed pairwise marginals ξ[i, j] (values only).
void Expectations(const Lattice<double> &lat, const std::vector<double> &e,
                  const std::vector<double> &t, std::vector<double> *mu,
                  std::vector<double> *xi) {
  const std::size_t n = lat.n;
  const std::size_t labels = lat.labels;
  if (mu) {
    mu->assign(n * labels, 0.0);
    for (std::size_t k = 0; k < n * labels; ++k)
      (*mu)[k] = std::exp(lat.alpha[k] + lat.beta[k] - lat.log_z);
  }
  if (xi) {
    xi->assign(labels * labels, 0.0);
    for (std::size_t p = 1; p < n; ++p)
      for (std::size_t i = 0; i < labels; ++i)
        for (std::size_t j = 0; j < labels; ++j)
          (*xi)[i * labels + j] +=
              std::exp(lat.alpha[(p - 1) * labels + i] + t[i * labels + j] +
                       e[p * labels + j] + lat.beta[p * labels + j] -
                       lat.log_z);
  }
}

}  // namespace

CrfParams MakeCrf(std::size_t labels, Rng &rng) {
  return {Parameter(XavierUniform({labels, labels}, rng))};
}

double CrfPathScore(const Tensor &emissions, const Tensor &transitions,
                    std::span<const std::size_t> labels) {
  CheckShapes(emissions, transitions);
  const std::size_t n = emissions.rows();
  const std::size_t num = emissions.cols();
  if (labels.size() != n)
    throw NumericsError(NumericsErrc::kDimMismatch,
                        "crf: path length " + std::to_string(labels.size()) +
                            " for " + std::to_string(n) + " positions");
  double s = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    if (labels[p] >= num)
      throw NumericsError(NumericsErrc::kDimMismatch, "crf: label out of range");
    s += emissions.at(p, labels[p]);
    if (p > 0) s += transitions.at(labels[p - 1], labels[p]);
  }
  return s;
}

double CrfLogPartition(const Tensor &emissions, const Tensor &transitions) {
  CheckShapes(emissions, transitions);
  return ForwardBackward(emissions.values, transitions.values, emissions.rows(),
                         emissions.cols())
      .log_z;
}

std::vector<std::size_t> ViterbiDecode(const Tensor &emissions,
                                       const Tensor &transitions) {
  CheckShapes(emissions, transitions);
  const std::size_t n = emissions.rows();
  const std::size_t labels = emissions.cols();
  std::vector<double> score(labels), next(labels);
  std::vector<std::size_t> back(n * labels, 0);
  for (std::size_t j = 0; j < labels; ++j) score[j] = emissions.at(0, j);
  for (std::size_t p = 1; p < n; ++p) {
    for (std::size_t j = 0; j < labels; ++j) {
      std::size_t best_i = 0;
      double best = score[0] + transitions.at(0, j);
      for (std::size_t i = 1; i < labels; ++i) {
        const double s = score[i] + transitions.at(i, j);
        if (s > best) {
          best = s;
          best_i = i;
        }
      }
      next[j] = best + emissions.at(p, j);
      back[p * labels + j] = best_i;
    }
    std::swap(score, next);
  }
  std::size_t last = 0;
  for (std::size_t j = 1; j < labels; ++j)
    if (score[j] > score[last]) last = j;
  std::vector<std::size_t> path(n);
  path[n - 1] = last;
  for (std::size_t p = n - 1; p > 0; --p) path[p - 1] = back[p * labels + path[p]];
  return path;
}

Tensor CrfMarginals(const Tensor &emissions, const Tensor &transitions) {
  CheckShapes(emissions, transitions);
  const auto lat = ForwardBackward(emissions.values, transitions.values,
                                   emissions.rows(), emissions.cols());
  Tensor out(emissions.shape);
  Expectations(lat, emissions.values, transitions.values, &out.values, nullptr);
  return out;
}

Var CrfLogPartition(const Var &emissions, const Var &transitions) {
  CheckShapes(emissions.tensor(), transitions.tensor());
  const std::size_t n = emissions.shape()[0];
  const std::size_t labels = emissions.shape()[1];
  auto lat = ForwardBackward(emissions.values(), transitions.values(), n, labels);
  const double log_z = lat.log_z;
  return Var::MakeResult(
      Tensor::Scalar(log_z), {emissions, transitions},
      [lat = std::move(lat)](Node &self) {
        const double g = self.data.grad[0];
        auto *pe = self.ParentGrad(0);
        auto *pt = self.ParentGrad(1);
        std::vector<double> mu, xi;
        Expectations(lat, self.Parent(0).values, self.Parent(1).values,
                     pe ? &mu : nullptr, pt ? &xi : nullptr);
        if (pe)
          for (std::size_t k = 0; k < mu.size(); ++k) (*pe)[k] += g * mu[k];
        if (pt)
          for (std::size_t k = 0; k < xi.size(); ++k) (*pt)[k] += g * xi[k];
      });
}

Var CrfPathScore(const Var &emissions, const Var &transitions,
                 std::span<const std::size_t> labels) {
  const double s = CrfPathScore(emissions.tensor(), transitions.tensor(), labels);
  const std::size_t num = emissions.shape()[1];
  std::vector<std::size_t> path(labels.begin(), labels.end());
  return Var::MakeResult(Tensor::Scalar(s), {emissions, transitions},
                         [path = std::move(path), num](Node &self) {
                           const double g = self.data.grad[0];
                           if (auto *pe = self.ParentGrad(0))
                             for (std::size_t p = 0; p < path.size(); ++p)
                               (*pe)[p * num + path[p]] += g;
                           if (auto *pt = self.ParentGrad(1))
                             for (std::size_t p = 1; p < path.size(); ++p)
                               (*pt)[path[p - 1] * num + path[p]] += g;
                         });
}

Var CrfNll(const Var &emissions, const Var &transitions,
           std::span<const std::size_t> gold) {
  return Sub(CrfLogPartition(emissions, transitions),
             CrfPathScore(emissions, transitions, gold));
}

Var CrfMarginals(const Var &emissions, const Var &transitions) {
  Tensor mu = CrfMarginals(emissions.tensor(), transitions.tensor());
  const std::size_t n = emissions.shape()[0];
  const std::size_t labels = emissions.shape()[1];
  return Var::MakeResult(
      std::move(mu), {emissions, transitions}, [n, labels](Node &self) {
        const auto &g = self.data.grad;
        const auto &ev = self.Parent(0).values;
        const auto &tv = self.Parent(1).values;
        // Perturb the emissions along the upstream gradient; the tangent of
        // μ (resp. Σξ) is then H_EE·g (resp. H_TE·g).
        std::vector<Dual> e(n * labels), t(labels * labels);
        for (std::size_t k = 0; k < e.size(); ++k) e[k] = {ev[k], g[k]};
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = {tv[k], 0.0};
        const auto lat = ForwardBackward(e, t, n, labels);
        if (auto *pe = self.ParentGrad(0)) {
          for (std::size_t k = 0; k < e.size(); ++k) {
            const double m = std::exp(lat.alpha[k].v + lat.beta[k].v - lat.log_z.v);
            (*pe)[k] += m * (lat.alpha[k].d + lat.beta[k].d - lat.log_z.d);
          }
        }
        if (auto *pt = self.ParentGrad(1)) {
          for (std::size_t p = 1; p < n; ++p)
            for (std::size_t i = 0; i < labels; ++i)
              for (std::size_t j = 0; j < labels; ++j) {
                const Dual &a = lat.alpha[(p - 1) * labels + i];
                const Dual &b = lat.beta[p * labels + j];
                const Dual &em = e[p * labels + j];
                const double v = a.v + tv[i * labels + j] + em.v + b.v - lat.log_z.v;
                const double d = a.d + em.d + b.d - lat.log_z.d;
                (*pt)[i * labels + j] += std::exp(v) * d;
              }
        }
      });
}

}  // namespace deplima::nn
