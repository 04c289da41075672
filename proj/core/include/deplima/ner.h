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

#ifndef DEPLIMA_NER_H_
#define DEPLIMA_NER_H_

// Named-entity recognition: a token-pattern rule engine with gazetteers,
// a word-level BiRNN-CRF tagger, and the BIO span encoding they share.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <string_view>
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

enum class NerErrc {
  kBadRuleReference,
  kBadRule,
  kOverlappingSpans,
  kOutOfRange,
  kEmptySentence,
  kEmptyTrainingSet,
  kBadModel,
  kBadCorpus,
};
using NerError = KindedError<NerErrc>;

enum class EntityType {
  kNumber,
  kDateTime,
  kOrganization,
  kLocation,
  kPerson,
  kEvent,
  kProduct,
  kMiscellaneous,
};

inline constexpr std::array<EntityType, 8> kRuleEntityTypes = {
    EntityType::kNumber,   EntityType::kDateTime, EntityType::kOrganization,
    EntityType::kLocation, EntityType::kPerson,   EntityType::kEvent,
    EntityType::kProduct,  EntityType::kMiscellaneous};
inline constexpr std::array<EntityType, 4> kNeuralEntityTypes = {
    EntityType::kOrganization, EntityType::kLocation, EntityType::kPerson,
    EntityType::kMiscellaneous};

std::string_view EntityTypeName(EntityType type);
// Case-insensitive; accepts the names above, "Date", and the abbreviations
// Num, Org, Loc, Per and Misc.
std::optional<EntityType> ParseEntityType(std::string_view name);

struct EntitySpan {
  EntityType type = EntityType::kMiscellaneous;
  std::size_t start = 0;  // token index
  std::size_t end = 0;    // exclusive

  auto operator<=>(const EntitySpan &) const = default;
};

// "O", "B-<Type>", "I-<Type>" per token.
using BioSequence = std::vector<std::string>;

// Throws kOverlappingSpans and kOutOfRange (also for empty spans).
BioSequence BioEncode(std::span<const EntitySpan> spans, std::size_t n);
// Maximal B, I, I.. runs; an I-t that does not continue a t span starts
// one. Unparseable tags count as O.
std::vector<EntitySpan> BioDecode(const BioSequence &tags);

// ---- Rules ----------------------------------------------------------------

struct PatternElement {
  enum class Kind { kLiteral, kCaseless, kRegex, kGazetteer, kPos };
  Kind kind = Kind::kLiteral;
  std::string text;  // literal, gazetteer name, UPOS or regex source
  std::shared_ptr<const std::regex> regex;
  bool repeat = false;  // one or more
};
using TokenPattern = std::vector<PatternElement>;

struct NerRule {
  std::string id;
  EntityType type = EntityType::kMiscellaneous;
  int priority = 0;
  TokenPattern trigger;
  TokenPattern left;   // tokens immediately before the span, at most 3
  TokenPattern right;  // tokens immediately after the span, at most 3
};

struct Gazetteer {
  std::set<std::vector<std::string>> entries;  // whitespace-tokenized terms
  std::size_t max_length = 0;

  void Add(std::string_view term);
};

struct RuleSet {
  std::vector<NerRule> rules;  // file order
  std::map<std::string, Gazetteer> gazetteers;
};

// Line format (blank lines and '#' comments ignored):
//   gazetteer <name> <path>          one term per line, path relative to
//                                    the rule file
//   term <name> <word> [<word>..]    adds one term to a gazetteer
//   rule <id> <Type> prio=<n> trigger=<pattern> [left=<pattern>]
//        [right=<pattern>]
// A pattern is a whitespace-separated element list, running until the next
// key. Elements: literal, ~caseless, /regex/ (whole token), @gazetteer,
// pos:UPOS; a trailing '+' repeats the element; a leading '\' quotes a
// literal. Throws kBadRule and kBadRuleReference.
RuleSet ParseRules(std::string_view text,
                   const std::function<std::string(const std::string &)> &read_file);
RuleSet LoadRules(const std::string &path);
TokenPattern ParsePattern(std::string_view text);

struct NerToken {
  std::string surface;
  std::string upos;
};

// Every rule match is a candidate; candidates are taken longest first,
// then by higher priority, then leftmost, then earlier rule, skipping any
// that overlaps an accepted span. The result is sorted by position.
std::vector<EntitySpan> ApplyRules(const RuleSet &rules, std::span<const NerToken> tokens);

// ---- Neural tagger --------------------------------------------------------

// Label 0 = O; 1 + 2k = B and 2 + 2k = I of kNeuralEntityTypes[k].
inline constexpr std::size_t kNerLabelCount = 1 + 2 * kNeuralEntityTypes.size();
std::string NerLabelName(std::size_t label);
// Tags of other types become O.
std::size_t NerLabelIndex(std::string_view tag);

struct NerModel {
  WordEncoder words;
  nn::BiRnnParams rnn;
  nn::Var projection;  // [2 hidden, kNerLabelCount]
  nn::CrfParams crf;

  std::vector<nn::Var> Parameters() const;
  void AttachEmbeddings(std::shared_ptr<const WordVectors> vectors);  // kBadModel
  nn::ModelArchive ToArchive() const;
  static NerModel FromArchive(const nn::ModelArchive &archive);  // kBadModel
  void Save(const std::string &path) const { ToArchive().Save(path); }
  static NerModel Load(const std::string &path);
};

NerModel MakeNerModel(WordEncoder words, std::size_t hidden, Rng &rng);

nn::Var NerEmissions(const NerModel &model, const std::vector<std::string> &forms,
                     const std::vector<bool> *use_trainable = nullptr);
nn::Var NerLoss(const NerModel &model, const std::vector<std::string> &forms,
                std::span<const std::size_t> labels, const std::vector<bool> *use_trainable = nullptr);
BioSequence NeuralNerTags(const NerModel &model, const std::vector<std::string> &forms);
// kEmptySentence.
std::vector<EntitySpan> NeuralNer(const NerModel &model, const std::vector<std::string> &forms);

struct NerSentence {
  std::vector<std::string> tokens;
  BioSequence tags;
};

// "token TAB tag" per line, blank line between sentences (kBadCorpus).
std::vector<NerSentence> ParseBioCorpus(std::string_view text);
std::string WriteBioCorpus(const std::vector<NerSentence> &corpus);
// Word forms with the NE=<tag> item of MISC (O when absent).
std::vector<NerSentence> NerCorpusFromConllu(const ConlluDocument &doc);

// Hyperparameters: hidden (32), char_dim (16), char_hidden (24), word_dim
// (32), epochs (15), lr (0.003), clip (5), min_count (2), word_drop (0.1).
NerModel TrainNer(const std::vector<NerSentence> &corpus,
                  std::shared_ptr<const WordVectors> embeddings, const Hyper &hyper,
                  std::uint64_t seed, TrainingLog *log = nullptr);

}  // namespace deplima

#endif  // DEPLIMA_NER_H_
