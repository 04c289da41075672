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

#ifndef DEPLIMA_TRAINING_H_
#define DEPLIMA_TRAINING_H_

// Shared training plumbing: string hyperparameter maps and epoch logs.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "deplima/error.h"

namespace deplima {

// Typed view of a key=value hyperparameter map. Every key must be read at
// least once before CheckAllUsed(), which rejects unknown names.
enum class HyperErrc { kUnknownKey, kBadValue };
using HyperError = KindedError<HyperErrc>;

class Hyper {
 public:
  Hyper() = default;
  explicit Hyper(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  std::size_t Size(const std::string &key, std::size_t fallback) const;
  double Real(const std::string &key, double fallback) const;
  // Throws HyperError(kUnknownKey) naming the unknown keys.
  void CheckAllUsed() const;

  const std::map<std::string, std::string> &values() const { return values_; }

 private:
  const std::string *Find(const std::string &key) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;        // mean per training sequence
  double dev_metric = NAN;  // NaN without a dev set
};
using TrainingLog = std::vector<EpochRecord>;

// "epoch\tloss\tdev" header plus one line per epoch.
std::string FormatTrainingLog(const TrainingLog &log);

}  // namespace deplima

#endif  // DEPLIMA_TRAINING_H_
