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

#include <string>
#include <vector>

#include "benchmark/benchmark.h"
#include "deplima/conllu.h"
#include "deplima/crf.h"
#include "deplima/embeddings.h"
#include "deplima/mst.h"
#include "deplima/ner.h"
#include "deplima/rng.h"
#include "deplima/tensor.h"
#include "deplima/word_encoder.h"

namespace {

using deplima::Rng;
using deplima::nn::Tensor;

Tensor RandomTensor(std::size_t rows, std::size_t cols, Rng &rng) {
  Tensor t({rows, cols});
  for (auto &v : t.values) v = rng.Normal();
  return t;
}

static void BM_Viterbi(benchmark::State &state) {
  const std::size_t n = state.range(0), labels = state.range(1);
  Rng rng(1);
  const Tensor e = RandomTensor(n, labels, rng);
  const Tensor t = RandomTensor(labels, labels, rng);
  for (auto _ : state) benchmark::DoNotOptimize(deplima::nn::ViterbiDecode(e, t));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Viterbi)->Args({50, 4})->Args({50, 9})->Args({500, 9});

static void BM_CrfLogPartition(benchmark::State &state) {
  const std::size_t n = state.range(0), labels = state.range(1);
  Rng rng(2);
  const Tensor e = RandomTensor(n, labels, rng);
  const Tensor t = RandomTensor(labels, labels, rng);
  for (auto _ : state) benchmark::DoNotOptimize(deplima::nn::CrfLogPartition(e, t));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_CrfLogPartition)->Args({50, 4})->Args({500, 9});

static void BM_MaxArborescence(benchmark::State &state) {
  const std::size_t n = state.range(0) + 1;
  Rng rng(3);
  std::vector<std::vector<double>> w(n, std::vector<double>(n));
  for (auto &row : w) {
    for (auto &v : row) v = rng.Normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(deplima::MaxArborescence(w));
  state.SetItemsProcessed(state.iterations() * (n - 1));
}
BENCHMARK(BM_MaxArborescence)->Arg(10)->Arg(40)->Arg(100);

const std::vector<std::string> &Words() {
  static const std::vector<std::string> words = [] {
    std::vector<std::string> out;
    Rng rng(4);
    for (int i = 0; i < 2000; ++i) {
      std::string w;
      const std::size_t len = 3 + rng.Index(6);
      for (std::size_t c = 0; c < len; ++c) w += static_cast<char>('a' + rng.Index(26));
      out.push_back(w);
    }
    return out;
  }();
  return words;
}

deplima::SubwordTable MakeTable(std::size_t dim) {
  deplima::SubwordTable table(dim, 2000);
  Rng rng(5);
  std::vector<double> v(dim);
  for (const auto &w : Words()) {
    for (auto &x : v) x = rng.Normal();
    table.SetWord(w, v);
  }
  table.DeriveBuckets();
  return table;
}

static void BM_QuantizedLookup(benchmark::State &state) {
  const deplima::SubwordTable table = MakeTable(64);
  const auto q = deplima::QuantizedTable::Quantize(
      table, {.subquantizers = 32, .codebook_size = 64, .iterations = 5});
  std::size_t i = 0;
  for (auto _ : state) {
    // Alternate in-vocabulary words and n-gram composed OOV forms.
    const std::string &w = Words()[i++ % Words().size()];
    benchmark::DoNotOptimize(q.Lookup(i % 2 ? w : w + "xq"));
  }
}
BENCHMARK(BM_QuantizedLookup);

std::vector<std::string> Sentence(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(Words()[(i * 7919) % Words().size()]);
  return out;
}

static void BM_RuleNer(benchmark::State &state) {
  const deplima::RuleSet rules = deplima::ParseRules(
      "term cities paris london\n"
      "rule num Number prio=1 trigger=/[0-9]+/\n"
      "rule city Location prio=2 trigger=@cities\n"
      "rule pair Miscellaneous trigger=/[a-c][a-z]+/ right=/[a-c][a-z]+/\n",
      nullptr);
  std::vector<deplima::NerToken> tokens;
  for (const auto &w : Sentence(state.range(0))) tokens.push_back({w, ""});
  for (auto _ : state) benchmark::DoNotOptimize(deplima::ApplyRules(rules, tokens));
  state.SetItemsProcessed(state.iterations() * tokens.size());
}
BENCHMARK(BM_RuleNer)->Arg(20)->Arg(200);

static void BM_NeuralNer(benchmark::State &state) {
  Rng rng(6);
  std::vector<std::string> frequent;
  std::vector<char32_t> chars;
  deplima::CollectWordInventory(Words(), 1, &frequent, &chars);
  auto words = deplima::MakeWordEncoder(frequent, chars, {}, nullptr, rng);
  const deplima::NerModel model = deplima::MakeNerModel(std::move(words), 32, rng);
  const std::vector<std::string> sentence = Sentence(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(deplima::NeuralNerTags(model, sentence));
  state.SetItemsProcessed(state.iterations() * sentence.size());
}
BENCHMARK(BM_NeuralNer)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
