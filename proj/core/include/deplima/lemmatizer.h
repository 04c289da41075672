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

#ifndef DEPLIMA_LEMMATIZER_H_
#define DEPLIMA_LEMMATIZER_H_

// Context-independent character-level encoder-decoder lemmatizer. The
// word's tags (UPOS and each feature) are embedded and projected into the
// encoder's initial state; the decoder reads its previous output and the
// input character at the same position, attends over the encoder states
// and decodes greedily.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "deplima/archive.h"
#include "deplima/conllu.h"
#include "deplima/error.h"
#include "deplima/rnn.h"
#include "deplima/training.h"

namespace deplima {

class Rng;

enum class LemmatizerErrc { kEmptyTrainingSet, kBadModel };
using LemmatizerError = KindedError<LemmatizerErrc>;

struct LemmaKey {
  std::string form;
  std::string upos;
  std::string feats;  // canonical FEATS string

  static LemmaKey Of(const std::string &form, const std::string &upos, const Features &feats) {
    return {form, upos, FormatFeatures(feats)};
  }
  std::string Serialize() const { return form + '\t' + upos + '\t' + feats; }
  bool operator==(const LemmaKey &) const = default;
};

struct LemmaTriple {
  LemmaKey key;
  std::string lemma;
};

// One triple per word of the treebank; with `distinct` each
// (key, lemma) pair once, in sorted order.
std::vector<LemmaTriple> LemmaTriples(const ConlluDocument &treebank, bool distinct);

// Last write wins on concurrent insertion of the same key.
class LemmaCache {
 public:
  bool Find(const std::string &key, std::string *value) const;
  void Insert(const std::string &key, const std::string &value);
  void Clear();
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::string> map_;
};

struct LemmatizerModel {
  static constexpr std::size_t kBos = 0;
  static constexpr std::size_t kEos = 1;
  static constexpr std::size_t kUnk = 2;

  std::vector<char32_t> chars;  // symbol kUnk + 1 + i
  std::unordered_map<char32_t, std::size_t> char_index;
  // Tag categories: "UPOS" first, then feature keys. Value 0 = absent or
  // unknown, value i = values[i - 1].
  std::vector<std::string> categories;
  std::vector<std::vector<std::string>> values;

  nn::Var char_table;             // [V, char_dim]
  std::vector<nn::Var> tag_tables;  // per category [1 + |values|, tag_dim]
  nn::Var init_w;                 // [enc_hidden, categories * tag_dim]
  nn::Var init_b;                 // [enc_hidden]
  nn::GruParams encoder;          // char_dim -> enc_hidden
  nn::GruParams decoder;          // 2 char_dim -> enc_hidden
  nn::Var out_w;                  // [dec + char_dim + enc, V]
  nn::Var out_b;                  // [V]

  std::shared_ptr<LemmaCache> cache = std::make_shared<LemmaCache>();
  bool cache_enabled = true;

  std::size_t symbols() const { return chars.size() + 3; }
  std::size_t Symbol(char32_t c) const;
  std::vector<nn::Var> Parameters() const;
  void Index();

  nn::ModelArchive ToArchive() const;
  static LemmatizerModel FromArchive(const nn::ModelArchive &archive);  // kBadModel
  void Save(const std::string &path) const { ToArchive().Save(path); }
  static LemmatizerModel Load(const std::string &path);
};

struct LemmatizerDims {
  std::size_t char_dim = 24;
  std::size_t tag_dim = 8;
  std::size_t hidden = 64;
};

// Character and tag inventories from the triples (kEmptyTrainingSet).
LemmatizerModel MakeLemmatizer(const std::vector<LemmaTriple> &triples,
                               const LemmatizerDims &dims, Rng &rng);

std::size_t MaxLemmaLength(const std::string &form);

// Greedy decode, memoized when the model's cache is enabled. A decoded
// unknown symbol reproduces the aligned input character when there is
// one.
std::string Lemmatize(const LemmatizerModel &model, const LemmaKey &key);
// Same decode without the cache.
std::string DecodeLemma(const LemmatizerModel &model, const LemmaKey &key);
// Fills LEMMA of every word from FORM, UPOS and FEATS.
void LemmatizeDocument(const LemmatizerModel &model, ConlluDocument &doc);

// Teacher-forced cross-entropy of lemma characters plus end of word.
nn::Var LemmaLoss(const LemmatizerModel &model, const LemmaTriple &triple);

// Hyperparameters: char_dim (24), tag_dim (8), hidden (64), epochs (20),
// lr (0.003), clip (5).
LemmatizerModel TrainLemmatizer(const std::vector<LemmaTriple> &triples, const Hyper &hyper,
                                std::uint64_t seed, TrainingLog *log = nullptr);

}  // namespace deplima

#endif  // DEPLIMA_LEMMATIZER_H_
