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

#ifndef DEPLIMA_TESTS_SUPPORT_TOY_MODELS_H_
#define DEPLIMA_TESTS_SUPPORT_TOY_MODELS_H_

// Small models trained on the toy treebank and written in the model
// directory layout the pipeline units read.

#include <cstddef>
#include <cstdint>
#include <string>

#include "deplima/conllu.h"

namespace deplima::testing {

struct ToyModelOptions {
  std::size_t sentences = 40;
  std::uint64_t seed = 1;
  std::size_t epochs = 2;
  std::size_t hidden = 16;
  bool embeddings = false;  // also write a quantized embeddings.dlq8
};

// Writes segmenter.dlma, parser.dlma, lemmatizer.dlma, ner.dlma and
// ner-rules.txt under <dir>/<lang>/ and returns the training treebank.
ConlluDocument WriteToyModels(const std::string &dir, const std::string &lang,
                              const ToyModelOptions &options = {});

// Fresh empty directory under the system temporary directory.
std::string MakeTempDir(const std::string &prefix);

}  // namespace deplima::testing

#endif  // DEPLIMA_TESTS_SUPPORT_TOY_MODELS_H_
