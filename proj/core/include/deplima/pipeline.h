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

#ifndef DEPLIMA_PIPELINE_H_
#define DEPLIMA_PIPELINE_H_

// Pipeline core: named analysis layers, processing units with declared
// layer contracts, a unit registry, shared resources and the declarative
// configuration format
//
//   pipeline <name> lang=<code>
//   step <unit> [key=value]*
//   begin <group> ... end          (grouping only; flattened on load)
//   resource <name> path=<path>
//
// Blank lines and lines starting with '#' are ignored.

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <typeindex>
#include <variant>
#include <vector>

#include "deplima/conllu.h"
#include "deplima/error.h"
#include "deplima/graph.h"

namespace deplima {

enum class PipelineErrc {
  kUnknownUnit,
  kUnsatisfiedInput,
  kMissingResource,
  kMissingParam,
  kUnitFailure,
  kMissingLayer,
  kUndeclaredLayer,
  kLayerKindMismatch,
  kBadConfig,
};

class PipelineError : public KindedError<PipelineErrc> {
 public:
  // `step` is the 1-based step index, or 0 when not tied to a step.
  PipelineError(PipelineErrc kind, std::size_t step, const std::string &what)
      : KindedError(kind, what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

inline constexpr const char *kRawTextLayer = "raw-text";
inline constexpr const char *kConlluInputLayer = "conllu-input";
inline constexpr const char *kTokenGraphLayer = "token-graph";
inline constexpr const char *kConlluOutputLayer = "conllu-output";

enum class LayerKind { kGraph, kDocument, kTable, kBytes };
const char *LayerKindName(LayerKind kind);

using ScoreTable = std::map<std::string, double>;
using Layer = std::variant<AnalysisGraph, ConlluDocument, ScoreTable, std::string>;
LayerKind KindOf(const Layer &layer);

class AnalysisData {
 public:
  bool Has(const std::string &name) const { return layers_.count(name) > 0; }
  // Throws kMissingLayer when absent and kLayerKindMismatch on a wrong type.
  const Layer &Get(const std::string &name) const;
  template <typename T>
  const T &Get(const std::string &name) const;

  void Set(const std::string &name, Layer layer);
  void Remove(const std::string &name) { layers_.erase(name); }
  std::vector<std::string> Names() const;
  const std::map<std::string, Layer> &layers() const { return layers_; }

  // Canonical byte serialization: layers in name order, each as a header
  // line followed by its content.
  std::string Serialize() const;

  bool operator==(const AnalysisData &other) const {
    return Serialize() == other.Serialize();
  }

 private:
  std::map<std::string, Layer> layers_;
};

// Contract-enforcing view handed to a unit. Reads are restricted to the
// declared inputs; writes to the declared outputs are staged and only
// published into the analysis data once the unit returns normally.
class UnitContext {
 public:
  UnitContext(const AnalysisData &data, const std::set<std::string> &inputs,
              const std::set<std::string> &outputs);

  const Layer &Read(const std::string &name) const;
  template <typename T>
  const T &Read(const std::string &name) const;
  // Copy of an input layer staged for in-place editing; the name must be
  // both an input and an output.
  template <typename T>
  T &Edit(const std::string &name);
  void Write(const std::string &name, Layer layer);

  const std::map<std::string, Layer> &staged() const { return staged_; }
  std::map<std::string, Layer> TakeStaged() { return std::move(staged_); }

 private:
  void RequireInput(const std::string &name) const;
  void RequireOutput(const std::string &name) const;

  const AnalysisData &data_;
  const std::set<std::string> &inputs_;
  const std::set<std::string> &outputs_;
  std::map<std::string, Layer> staged_;
};

class ProcessingUnit {
 public:
  virtual ~ProcessingUnit() = default;
  virtual std::string name() const = 0;
  virtual std::vector<std::string> inputs() const = 0;
  virtual std::vector<std::string> outputs() const = 0;
  // Must be safe to call concurrently on distinct contexts.
  virtual void Process(UnitContext &context) const = 0;
};

// Loaded resources keyed by (language, name); each is loaded at most once
// and then shared read-only.
class ResourceRegistry {
 public:
  explicit ResourceRegistry(std::string model_dir = "") : model_dir_(std::move(model_dir)) {}

  void set_model_dir(std::string dir);
  const std::string &model_dir() const { return model_dir_; }
  void SetPath(const std::string &lang, const std::string &name, std::string path);

  // Explicit path if one was set, else <model_dir>/<lang>/<default_file>.
  // Throws kMissingResource when the file does not exist.
  std::string Resolve(const std::string &lang, const std::string &name,
                      const std::string &default_file) const;

  // Installs an already loaded resource.
  template <typename T>
  void Put(const std::string &lang, const std::string &name, std::shared_ptr<const T> value);

  // Returns the cached resource or runs `load` once under the registry
  // lock. Throws kLayerKindMismatch if cached under another type.
  template <typename T>
  std::shared_ptr<const T> Get(const std::string &lang, const std::string &name,
                               const std::function<std::shared_ptr<const T>()> &load);

  std::size_t load_count(const std::string &lang, const std::string &name) const;

 private:
  using Key = std::pair<std::string, std::string>;
  struct Entry {
    std::shared_ptr<const void> value;
    std::type_index type = typeid(void);
  };
  std::shared_ptr<const void> Lookup(const Key &key, std::type_index type) const;

  mutable std::recursive_mutex mu_;
  std::string model_dir_;
  std::map<Key, std::string> paths_;
  std::map<Key, Entry> entries_;
  std::map<Key, std::size_t> loads_;
};

using UnitParams = std::map<std::string, std::string>;

struct UnitSetup {
  std::string unit;
  std::string language;
  const UnitParams &params;
  ResourceRegistry &resources;

  // Throws kMissingParam.
  const std::string &Require(const std::string &key) const;
  std::string Param(const std::string &key, const std::string &fallback) const;
};

using UnitFactory = std::function<std::unique_ptr<ProcessingUnit>(const UnitSetup &)>;

class UnitRegistry {
 public:
  // Re-registration replaces the factory and logs a warning.
  void Register(const std::string &name, UnitFactory factory);
  bool Has(const std::string &name) const { return factories_.count(name) > 0; }
  // Throws kUnknownUnit.
  const UnitFactory &Factory(const std::string &name) const;
  std::vector<std::string> Names() const;

 private:
  std::map<std::string, UnitFactory> factories_;
};

struct PipelineStep {
  std::string unit;
  UnitParams params;
  bool operator==(const PipelineStep &) const = default;
};

struct PipelineConfig {
  std::string name;
  std::string language;
  std::vector<PipelineStep> steps;
  std::map<std::string, std::string> resources;
  bool operator==(const PipelineConfig &) const = default;
};

PipelineConfig ParseConfig(const std::string &text);  // kBadConfig
std::string WriteConfig(const PipelineConfig &config);

class Pipeline {
 public:
  Pipeline(std::string name, std::vector<std::unique_ptr<ProcessingUnit>> units);

  const std::string &name() const { return name_; }
  std::size_t size() const { return units_.size(); }
  const ProcessingUnit &unit(std::size_t i) const { return *units_[i]; }

  // Runs every unit once, in order. A failing unit aborts the run with
  // kUnitFailure (or kUndeclaredLayer on a contract breach) and publishes
  // nothing. Safe to call concurrently with distinct inputs.
  AnalysisData Run(AnalysisData input) const;

 private:
  std::string name_;
  std::vector<std::unique_ptr<ProcessingUnit>> units_;
};

// Instantiates and checks the steps: unknown units, unsatisfiable inputs
// and missing params or resources are reported here.
Pipeline BuildPipeline(const PipelineConfig &config, const UnitRegistry &units,
                       ResourceRegistry &resources);

bool IsPrimordialLayer(const std::string &name);

// ---- template implementations ----

template <typename T>
const T &AnalysisData::Get(const std::string &name) const {
  const Layer &layer = Get(name);
  if (const T *v = std::get_if<T>(&layer)) return *v;
  throw PipelineError(PipelineErrc::kLayerKindMismatch, 0,
                      "layer '" + name + "' has kind " + LayerKindName(KindOf(layer)));
}

template <typename T>
const T &UnitContext::Read(const std::string &name) const {
  const Layer &layer = Read(name);
  if (const T *v = std::get_if<T>(&layer)) return *v;
  throw PipelineError(PipelineErrc::kLayerKindMismatch, 0,
                      "layer '" + name + "' has kind " + LayerKindName(KindOf(layer)));
}

template <typename T>
T &UnitContext::Edit(const std::string &name) {
  RequireInput(name);
  RequireOutput(name);
  auto it = staged_.find(name);
  if (it == staged_.end()) it = staged_.emplace(name, Read(name)).first;
  if (T *v = std::get_if<T>(&it->second)) return *v;
  throw PipelineError(PipelineErrc::kLayerKindMismatch, 0,
                      "layer '" + name + "' has kind " +
                          LayerKindName(KindOf(it->second)));
}

template <typename T>
void ResourceRegistry::Put(const std::string &lang, const std::string &name,
                           std::shared_ptr<const T> value) {
  std::lock_guard<std::recursive_mutex> lock(mu_);
  entries_[{lang, name}] = Entry{std::move(value), typeid(T)};
}

template <typename T>
std::shared_ptr<const T> ResourceRegistry::Get(
    const std::string &lang, const std::string &name,
    const std::function<std::shared_ptr<const T>()> &load) {
  std::lock_guard<std::recursive_mutex> lock(mu_);
  const Key key{lang, name};
  if (auto v = Lookup(key, typeid(T))) return std::static_pointer_cast<const T>(v);
  std::shared_ptr<const T> value = load();
  entries_[key] = Entry{value, typeid(T)};
  ++loads_[key];
  return value;
}

}  // namespace deplima

#endif  // DEPLIMA_PIPELINE_H_
