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

#ifndef DEPLIMA_UNITS_H_
#define DEPLIMA_UNITS_H_

// Built-in processing units and the six preconfigured pipelines.
//
//   unit            inputs         outputs        resources
//   ud-tokenizer    raw-text       token-graph    segmenter
//   conllu-reader   conllu-input   token-graph
//   tagger-parser   token-graph    token-graph    parser [, embeddings]
//   lemmatizer      token-graph    token-graph    lemmatizer
//   ner-rules       token-graph    token-graph    ner-rules
//   ner-deep        token-graph    token-graph    ner [, embeddings]
//   conllu-writer   token-graph    conllu-output
//
// The NER units annotate entity tokens with "ne" = B-<Type> / I-<Type>;
// the writer renders it as an NE=<tag> item of MISC.

#include <string>
#include <vector>

#include "deplima/pipeline.h"

namespace deplima {

inline constexpr const char *kNeAnnotation = "ne";

// Default file names under <model-dir>/<lang>/.
inline constexpr const char *kSegmenterFile = "segmenter.dlma";
inline constexpr const char *kParserFile = "parser.dlma";
inline constexpr const char *kLemmatizerFile = "lemmatizer.dlma";
inline constexpr const char *kNerModelFile = "ner.dlma";
inline constexpr const char *kEmbeddingsFile = "embeddings.dlq8";
inline constexpr const char *kNerRulesFile = "ner-rules.txt";

void RegisterBuiltinUnits(UnitRegistry &registry);
UnitRegistry BuiltinUnits();

// deepud, deepud-pretok, ner-rules, ner-rules-pretok, ner-deep,
// ner-deep-pretok.
const std::vector<std::string> &BuiltinPipelineNames();
// Config text of a built-in pipeline (kBadConfig for other names).
std::string BuiltinPipelineText(const std::string &name, const std::string &lang);
PipelineConfig BuiltinPipeline(const std::string &name, const std::string &lang);
// Layer holding the input of a pipeline: conllu-input for "pretok"
// configurations, raw-text otherwise.
std::string InputLayerOf(const PipelineConfig &config);

}  // namespace deplima

#endif  // DEPLIMA_UNITS_H_
