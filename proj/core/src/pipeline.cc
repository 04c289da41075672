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

#include "deplima/pipeline.h"

#include <filesystem>
#include <sstream>
#include <utility>

#include "deplima/log.h"
#include "deplima/utf8.h"

namespace deplima {

const char *LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kGraph:
      return "graph";
    case LayerKind::kDocument:
      return "document";
    case LayerKind::kTable:
      return "table";
    case LayerKind::kBytes:
      return "bytes";
  }
  return "?";
}

LayerKind KindOf(const Layer &layer) {
  return static_cast<LayerKind>(layer.index());
}

bool IsPrimordialLayer(const std::string &name) {
  return name == kRawTextLayer || name == kConlluInputLayer;
}

// ---- AnalysisData ----

const Layer &AnalysisData::Get(const std::string &name) const {
  auto it = layers_.find(name);
  if (it == layers_.end())
    throw PipelineError(PipelineErrc::kMissingLayer, 0, "no layer '" + name + "'");
  return it->second;
}

void AnalysisData::Set(const std::string &name, Layer layer) {
  layers_.insert_or_assign(name, std::move(layer));
}

std::vector<std::string> AnalysisData::Names() const {
  std::vector<std::string> names;
  for (const auto &[k, v] : layers_) names.push_back(k);
  return names;
}

std::string AnalysisData::Serialize() const {
  std::string out;
  for (const auto &[name, layer] : layers_) {
    std::string body;
    switch (KindOf(layer)) {
      case LayerKind::kGraph:
        body = SerializeGraph(std::get<AnalysisGraph>(layer));
        break;
      case LayerKind::kDocument:
        body = WriteConllu(std::get<ConlluDocument>(layer));
        break;
      case LayerKind::kTable: {
        std::ostringstream os;
        os.precision(17);
        for (const auto &[k, v] : std::get<ScoreTable>(layer)) os << k << '=' << v << '\n';
        body = os.str();
        break;
      }
      case LayerKind::kBytes:
        body = std::get<std::string>(layer);
        break;
    }
    out += "layer\t" + name + "\t" + LayerKindName(KindOf(layer)) + "\t" +
           std::to_string(body.size()) + "\n";
    out += body;
    out.push_back('\n');
  }
  return out;
}

// ---- UnitContext ----

UnitContext::UnitContext(const AnalysisData &data, const std::set<std::string> &inputs,
                         const std::set<std::string> &outputs)
    : data_(data), inputs_(inputs), outputs_(outputs) {}

void UnitContext::RequireInput(const std::string &name) const {
  if (!inputs_.count(name))
    throw PipelineError(PipelineErrc::kUndeclaredLayer, 0,
                        "read of undeclared input layer '" + name + "'");
}

void UnitContext::RequireOutput(const std::string &name) const {
  if (!outputs_.count(name))
    throw PipelineError(PipelineErrc::kUndeclaredLayer, 0,
                        "write of undeclared output layer '" + name + "'");
}

const Layer &UnitContext::Read(const std::string &name) const {
  RequireInput(name);
  if (auto it = staged_.find(name); it != staged_.end()) return it->second;
  return data_.Get(name);
}

void UnitContext::Write(const std::string &name, Layer layer) {
  RequireOutput(name);
  staged_.insert_or_assign(name, std::move(layer));
}

// ---- ResourceRegistry ----

void ResourceRegistry::set_model_dir(std::string dir) {
  std::lock_guard<std::recursive_mutex> lock(mu_);
  model_dir_ = std::move(dir);
}

void ResourceRegistry::SetPath(const std::string &lang, const std::string &name,
                               std::string path) {
  std::lock_guard<std::recursive_mutex> lock(mu_);
  paths_[{lang, name}] = std::move(path);
}

std::string ResourceRegistry::Resolve(const std::string &lang, const std::string &name,
                                      const std::string &default_file) const {
  std::lock_guard<std::recursive_mutex> lock(mu_);
  std::string path;
  if (auto it = paths_.find({lang, name}); it != paths_.end()) {
    path = it->second;
  } else if (!model_dir_.empty()) {
    path = (std::filesystem::path(model_dir_) / lang / default_file).string();
  }
  std::error_code ec;
  if (path.empty() || !std::filesystem::is_regular_file(path, ec))
    throw PipelineError(PipelineErrc::kMissingResource, 0,
                        "missing resource " + name + " for language '" + lang + "'" +
                            (path.empty() ? std::string(" (no model directory)")
                                          : " at " + path));
  return path;
}

std::shared_ptr<const void> ResourceRegistry::Lookup(const Key &key,
                                                     std::type_index type) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  if (it->second.type != type)
    throw PipelineError(PipelineErrc::kLayerKindMismatch, 0,
                        "resource " + key.second + " for '" + key.first +
                            "' has a different type");
  return it->second.value;
}

std::size_t ResourceRegistry::load_count(const std::string &lang,
                                         const std::string &name) const {
  std::lock_guard<std::recursive_mutex> lock(mu_);
  auto it = loads_.find({lang, name});
  return it == loads_.end() ? 0 : it->second;
}

// ---- units ----

const std::string &UnitSetup::Require(const std::string &key) const {
  auto it = params.find(key);
  if (it == params.end())
    throw PipelineError(PipelineErrc::kMissingParam, 0,
                        "unit " + unit + " requires parameter '" + key + "'");
  return it->second;
}

std::string UnitSetup::Param(const std::string &key, const std::string &fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void UnitRegistry::Register(const std::string &name, UnitFactory factory) {
  if (factories_.count(name))
    DEPLIMA_LOG(kWarning) << "unit '" << name << "' re-registered; replacing factory";
  factories_[name] = std::move(factory);
}

const UnitFactory &UnitRegistry::Factory(const std::string &name) const {
  auto it = factories_.find(name);
  if (it == factories_.end())
    throw PipelineError(PipelineErrc::kUnknownUnit, 0, "unknown unit '" + name + "'");
  return it->second;
}

std::vector<std::string> UnitRegistry::Names() const {
  std::vector<std::string> names;
  for (const auto &[k, v] : factories_) names.push_back(k);
  return names;
}

// ---- config ----

namespace {

std::vector<std::string> Words(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void ConfigError(std::size_t line, const std::string &what) {
  throw PipelineError(PipelineErrc::kBadConfig, 0,
                      "config line " + std::to_string(line) + ": " + what);
}

std::pair<std::string, std::string> KeyValue(const std::string &word, std::size_t line) {
  const std::size_t eq = word.find('=');
  if (eq == std::string::npos || eq == 0) ConfigError(line, "expected key=value, got '" + word + "'");
  return {word.substr(0, eq), word.substr(eq + 1)};
}

}  // namespace

PipelineConfig ParseConfig(const std::string &text) {
  PipelineConfig config;
  bool have_header = false;
  std::size_t depth = 0;
  std::size_t line_no = 0;
  for (const std::string &raw : utf8::Split(text, '\n')) {
    ++line_no;
    const std::string_view line = utf8::Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto words = Words(line);
    const std::string &head = words[0];
    if (head == "pipeline") {
      if (have_header) ConfigError(line_no, "duplicate pipeline header");
      if (words.size() != 3) ConfigError(line_no, "expected 'pipeline <name> lang=<code>'");
      const auto [k, v] = KeyValue(words[2], line_no);
      if (k != "lang") ConfigError(line_no, "expected lang=<code>");
      config.name = words[1];
      config.language = v;
      have_header = true;
      continue;
    }
    if (!have_header) ConfigError(line_no, "missing pipeline header");
    if (head == "step") {
      if (words.size() < 2) ConfigError(line_no, "step without unit name");
      PipelineStep step{words[1], {}};
      for (std::size_t i = 2; i < words.size(); ++i) {
        auto [k, v] = KeyValue(words[i], line_no);
        if (!step.params.emplace(k, v).second) ConfigError(line_no, "duplicate key " + k);
      }
      config.steps.push_back(std::move(step));
    } else if (head == "resource") {
      if (words.size() != 3) ConfigError(line_no, "expected 'resource <name> path=<path>'");
      const auto [k, v] = KeyValue(words[2], line_no);
      if (k != "path") ConfigError(line_no, "expected path=<path>");
      config.resources[words[1]] = v;
    } else if (head == "begin") {
      ++depth;
    } else if (head == "end") {
      if (depth == 0) ConfigError(line_no, "'end' without 'begin'");
      --depth;
    } else {
      ConfigError(line_no, "unknown directive '" + head + "'");
    }
  }
  if (!have_header) ConfigError(line_no, "missing pipeline header");
  if (depth != 0) ConfigError(line_no, "unterminated group");
  return config;
}

std::string WriteConfig(const PipelineConfig &config) {
  std::string out = "pipeline " + config.name + " lang=" + config.language + "\n";
  for (const auto &s : config.steps) {
    out += "step " + s.unit;
    for (const auto &[k, v] : s.params) out += " " + k + "=" + v;
    out += "\n";
  }
  for (const auto &[k, v] : config.resources) out += "resource " + k + " path=" + v + "\n";
  return out;
}

// ---- pipeline ----

Pipeline::Pipeline(std::string name, std::vector<std::unique_ptr<ProcessingUnit>> units)
    : name_(std::move(name)), units_(std::move(units)) {}

AnalysisData Pipeline::Run(AnalysisData data) const {
  for (std::size_t i = 0; i < units_.size(); ++i) {
    const ProcessingUnit &unit = *units_[i];
    const std::size_t step = i + 1;
    const auto in = unit.inputs();
    const auto out = unit.outputs();
    const std::set<std::string> inputs(in.begin(), in.end());
    const std::set<std::string> outputs(out.begin(), out.end());
    for (const auto &name : inputs)
      if (!data.Has(name))
        throw PipelineError(PipelineErrc::kUnsatisfiedInput, step,
                            "step " + std::to_string(step) + " (" + unit.name() +
                                "): missing input layer '" + name + "'");
    UnitContext context(data, inputs, outputs);
    try {
      unit.Process(context);
    } catch (const PipelineError &e) {
      if (e.kind() == PipelineErrc::kUndeclaredLayer)
        throw PipelineError(e.kind(), step,
                            "step " + std::to_string(step) + " (" + unit.name() +
                                "): " + e.what());
      throw PipelineError(PipelineErrc::kUnitFailure, step,
                          "step " + std::to_string(step) + " (" + unit.name() +
                              "): " + e.what());
    } catch (const std::exception &e) {
      throw PipelineError(PipelineErrc::kUnitFailure, step,
                          "step " + std::to_string(step) + " (" + unit.name() +
                              "): " + e.what());
    }
    for (const auto &name : outputs)
      if (!context.staged().count(name) && !data.Has(name))
        throw PipelineError(PipelineErrc::kUnitFailure, step,
                            "step " + std::to_string(step) + " (" + unit.name() +
                                "): output layer '" + name + "' not produced");
    for (auto &[name, layer] : context.TakeStaged()) data.Set(name, std::move(layer));
  }
  return data;
}

Pipeline BuildPipeline(const PipelineConfig &config, const UnitRegistry &units,
                       ResourceRegistry &resources) {
  for (const auto &[name, path] : config.resources)
    resources.SetPath(config.language, name, path);
  std::vector<std::unique_ptr<ProcessingUnit>> built;
  std::set<std::string> available{kRawTextLayer, kConlluInputLayer};
  for (std::size_t i = 0; i < config.steps.size(); ++i) {
    const auto &step = config.steps[i];
    const std::size_t index = i + 1;
    std::unique_ptr<ProcessingUnit> unit;
    try {
      const UnitFactory &factory = units.Factory(step.unit);
      unit = factory(UnitSetup{step.unit, config.language, step.params, resources});
    } catch (const PipelineError &e) {
      throw PipelineError(e.kind(), index,
                          "step " + std::to_string(index) + ": " + e.what());
    }
    for (const auto &name : unit->inputs())
      if (!available.count(name))
        throw PipelineError(PipelineErrc::kUnsatisfiedInput, index,
                            "step " + std::to_string(index) + " (" + step.unit +
                                ") needs layer '" + name +
                                "' which no earlier step produces");
    for (const auto &name : unit->outputs()) available.insert(name);
    built.push_back(std::move(unit));
  }
  return Pipeline(config.name, std::move(built));
}

}  // namespace deplima
