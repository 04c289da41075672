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

#ifndef DEPLIMA_TAGGER_PARSER_H_
#define DEPLIMA_TAGGER_PARSER_H_

// Joint morphological tagger and biaffine dependency parser.
//
// Word vectors (pretrained + trainable for frequent words, concatenated
// with a character GRU's final state) feed a shared BiRNN. Each tag
// category (UPOS and every retained feature key) has its own projection
// and CRF. A second BiRNN reads the shared states together with every
// category's posterior marginals and drives the arc and label scorers.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "deplima/archive.h"
#include "deplima/conllu.h"
#include "deplima/crf.h"
#include "deplima/embeddings.h"
#include "deplima/error.h"
#include "deplima/rnn.h"
#include "deplima/training.h"
#include "deplima/word_encoder.h"

namespace deplima {

class Rng;

enum class TaggerErrc { kEmptySentence, kEmptyTrainingSet, kMissingGoldAnnotations, kBadModel };
using TaggerError = KindedError<TaggerErrc>;

inline constexpr const char *kUposCategory = "UPOS";
inline constexpr const char *kRootDeprel = "root";

struct TagCategory {
  std::string name;                 // "UPOS" or a feature key
  std::vector<std::string> labels;  // labels[0] = "" (absent)

  std::size_t Index(const std::string &label) const;  // 0 when unknown
};

struct TaggerInventory {
  std::vector<TagCategory> categories;  // UPOS first, then features
  std::vector<std::string> deprels;     // sorted, contains "root"
};

// UPOS, every feature key present on at least rare_threshold of the words,
// and the deprels. Throws kEmptyTrainingSet and kMissingGoldAnnotations.
TaggerInventory BuildTaggerInventory(const ConlluDocument &treebank, double rare_threshold);

struct TaggerParserDims {
  std::size_t hidden1 = 64;
  std::size_t hidden2 = 64;
  std::size_t arc = 64;
  std::size_t label = 32;
};

struct CategoryHead {
  nn::Var projection;  // [2 hidden1, L_c]
  nn::CrfParams crf;
};

struct TaggerParserModel {
  TaggerInventory inventory;
  WordEncoder words;
  nn::BiRnnParams rnn1;
  std::vector<CategoryHead> heads;  // parallel to inventory.categories
  nn::BiRnnParams rnn2;
  nn::Var root;  // [2 hidden2], the artificial root's state
  nn::Var arc_head_w, arc_head_b, arc_dep_w, arc_dep_b;
  nn::Var arc_w;     // [arc, arc]
  nn::Var arc_bias;  // [arc]
  nn::Var label_head_w, label_head_b, label_dep_w, label_dep_b;
  nn::Var label_w;  // [3 label, R] over [h; d; h * d]
  nn::Var label_b;  // [R]

  std::vector<nn::Var> Parameters() const;
  std::size_t posterior_dim() const;

  // Attaches the pretrained table used at inference (kBadModel on a
  // dimension mismatch).
  void AttachEmbeddings(std::shared_ptr<const WordVectors> vectors);

  nn::ModelArchive ToArchive() const;
  static TaggerParserModel FromArchive(const nn::ModelArchive &archive);  // kBadModel
  void Save(const std::string &path) const { ToArchive().Save(path); }
  static TaggerParserModel Load(const std::string &path);
};

TaggerParserModel MakeTaggerParser(TaggerInventory inventory, WordEncoder words,
                                   const TaggerParserDims &dims, Rng &rng);

// Shared BiRNN states, one [2 hidden1] vector per word. kEmptySentence.
std::vector<nn::Var> EncodeSentence(const TaggerParserModel &model,
                                    const std::vector<std::string> &forms,
                                    const std::vector<bool> *use_trainable = nullptr);

struct MorphOutput {
  std::vector<std::vector<std::size_t>> labels;  // per category, Viterbi
  std::vector<nn::Var> emissions;                // per category, [n, L_c]
  std::vector<nn::Var> posteriors;               // per category, [n, L_c]
};
MorphOutput TagMorphology(const TaggerParserModel &model, const std::vector<nn::Var> &states,
                          bool decode = true);

// Second BiRNN over [states ; posteriors of every category].
std::vector<nn::Var> ParserStates(const TaggerParserModel &model,
                                  const std::vector<nn::Var> &states,
                                  const std::vector<nn::Var> &posteriors);
// [n + 1, n]; row 0 is the root as head.
nn::Var ArcScores(const TaggerParserModel &model, const std::vector<nn::Var> &parser_states);
// Label scores [k, R] for the given (head, dependent) pairs, heads with
// 0 = root and dependents 1-based.
nn::Var LabelScores(const TaggerParserModel &model, const std::vector<nn::Var> &parser_states,
                    const std::vector<int> &heads, const std::vector<int> &dependents);

struct ParseOutput {
  std::vector<int> heads;  // 0 = root
  std::vector<std::string> deprels;
};
// Single-root maximum spanning tree, then the best label per arc; the
// root's child is labelled "root" and no other arc is.
ParseOutput ParseDependencies(const TaggerParserModel &model, const std::vector<nn::Var> &states,
                              const std::vector<nn::Var> &posteriors);

struct SentenceAnalysis {
  std::vector<std::string> upos;
  std::vector<Features> feats;
  std::vector<int> heads;
  std::vector<std::string> deprels;
};
SentenceAnalysis AnalyzeSentence(const TaggerParserModel &model,
                                 const std::vector<std::string> &forms);
// Fills UPOS, FEATS, HEAD and DEPREL of every word in place.
void AnalyzeDocument(const TaggerParserModel &model, ConlluDocument &doc);

// Sum of category CRF losses, arc cross-entropy over the n + 1 candidate
// heads of each word (its own row excluded) and label cross-entropy on the
// gold arcs. `word_drop` removes the trainable vector with that
// probability per word.
nn::Var JointLoss(const TaggerParserModel &model, const ConlluSentence &sentence,
                  Rng *rng = nullptr, double word_drop = 0.0);

// Hyperparameters: hidden1, hidden2 (64), arc (64), label (32), char_dim
// (16), char_hidden (32), word_dim (32), epochs (20), lr (0.002), clip
// (5), min_count (3), rare_threshold (0.001), word_drop (0.1). With a dev
// set the epoch with the best dev LAS is returned.
TaggerParserModel TrainJoint(const ConlluDocument &treebank,
                             std::shared_ptr<const WordVectors> embeddings, const Hyper &hyper,
                             std::uint64_t seed, const ConlluDocument *dev = nullptr,
                             TrainingLog *log = nullptr);

}  // namespace deplima

#endif  // DEPLIMA_TAGGER_PARSER_H_
