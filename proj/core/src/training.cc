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

#include "deplima/training.h"

#include <charconv>
#include <cstdio>
#include <cstdlib>

#include "deplima/error.h"

namespace deplima {

const std::string *Hyper::Find(const std::string &key) const {
  used_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::size_t Hyper::Size(const std::string &key, std::size_t fallback) const {
  const std::string *v = Find(key);
  if (!v) return fallback;
  std::size_t out = 0;
  const auto r = std::from_chars(v->data(), v->data() + v->size(), out);
  if (r.ec != std::errc() || r.ptr != v->data() + v->size())
    throw HyperError(HyperErrc::kBadValue, "hyperparameter " + key + ": expected a non-negative integer, got '" + *v + "'");
  return out;
}

double Hyper::Real(const std::string &key, double fallback) const {
  const std::string *v = Find(key);
  if (!v) return fallback;
  char *end = nullptr;
  const double out = std::strtod(v->c_str(), &end);
  if (v->empty() || end != v->c_str() + v->size() || !std::isfinite(out))
    throw HyperError(HyperErrc::kBadValue, "hyperparameter " + key + ": expected a number, got '" + *v + "'");
  return out;
}

void Hyper::CheckAllUsed() const {
  std::string unknown;
  for (const auto &[k, v] : values_)
    if (!used_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
  if (!unknown.empty()) throw HyperError(HyperErrc::kUnknownKey, "unknown hyperparameters: " + unknown);
}

std::string FormatTrainingLog(const TrainingLog &log) {
  std::string out = "epoch\tloss\tdev\n";
  char buf[96];
  for (const auto &r : log) {
    if (std::isnan(r.dev_metric))
      std::snprintf(buf, sizeof(buf), "%zu\t%.6f\t-\n", r.epoch, r.loss);
    else
      std::snprintf(buf, sizeof(buf), "%zu\t%.6f\t%.4f\n", r.epoch, r.loss, r.dev_metric);
    out += buf;
  }
  return out;
}

}  // namespace deplima
