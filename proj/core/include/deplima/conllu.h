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

#ifndef DEPLIMA_CONLLU_H_
#define DEPLIMA_CONLLU_H_

// CoNLL-U reader/writer. Columns other than FORM and LEMMA hold "" for the
// "_" placeholder; FORM and LEMMA are kept verbatim since "_" is a real
// word form. The writer always emits "_" for empty fields, FEATS sorted by
// key, one blank line after every sentence.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deplima/error.h"
#include "deplima/graph.h"

namespace deplima {

enum class ConlluErrc {
  kBadColumnCount,
  kBadId,
  kNonContiguousIds,
  kBadHead,
  kEmptyNode,
  kEmptySentence,
  kEmptyDocument,
  kInvariantViolation,
};

class ConlluError : public KindedError<ConlluErrc> {
 public:
  // `location` is a 1-based line number or sentence number, depending on
  // the kind (sentence number for kNonContiguousIds).
  ConlluError(ConlluErrc kind, std::size_t location, const std::string &what)
      : KindedError(kind, what), location_(location) {}
  std::size_t location() const { return location_; }

 private:
  std::size_t location_;
};

using Features = std::map<std::string, std::string>;

// "Key=Val|Key=Val" with keys sorted; "" for none.
std::string FormatFeatures(const Features &feats);
Features ParseFeatures(std::string_view text);

struct ConlluToken {
  int first = 0;  // simple id, or range start
  int last = 0;   // == first for simple rows
  bool is_range = false;
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos;
  Features feats;
  std::optional<int> head;
  std::string deprel;
  std::string deps;
  std::string misc;

  std::string IdString() const;
  bool operator==(const ConlluToken &) const = default;
};

struct ConlluSentence {
  std::vector<std::string> comments;  // full lines, including "#"
  std::vector<ConlluToken> tokens;

  // Simple (non-range) rows in order.
  std::vector<const ConlluToken *> Words() const;
  std::vector<ConlluToken *> MutableWords();
  // Value of the "# text = ..." comment, if present.
  std::optional<std::string> Text() const;
  bool operator==(const ConlluSentence &) const = default;
};

struct ConlluDocument {
  std::vector<ConlluSentence> sentences;

  std::size_t WordCount() const;
  bool operator==(const ConlluDocument &) const = default;
};

ConlluDocument ParseConllu(std::string_view text);
std::string WriteConllu(const ConlluDocument &doc);  // kInvariantViolation

// Graph conversion. Tokens become one chain; node annotations carry the
// columns ("lemma", "upos", "xpos", "feats", "deps", "misc"), the sentence
// index ("sent"), sentence comments on the first token ("sent:comments")
// and range rows on their first word ("mwt"). Offsets come from the
// "# text" comment when it aligns, otherwise forms are laid out separated
// by single spaces.
AnalysisGraph ConlluToGraph(const ConlluDocument &doc);
// Inverse on the graph's first path. Sentences missing comments get
// "# sent_id" and, when "sent:text" is annotated, "# text".
ConlluDocument GraphToConllu(const AnalysisGraph &graph);

// Sentence index annotation helpers shared by the processing units.
inline constexpr const char *kSentenceKey = "sent";
// Token node ids of the first path grouped by sentence index.
std::vector<std::vector<NodeId>> SentencesOf(const AnalysisGraph &graph);

}  // namespace deplima

#endif  // DEPLIMA_CONLLU_H_
