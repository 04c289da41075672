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

#ifndef DEPLIMA_SEGMENTER_H_
#define DEPLIMA_SEGMENTER_H_

// Character-level BiRNN-CRF token and sentence segmenter. Each character
// is represented by the concatenated embeddings of its unigram, the bigram
// ending at it and the trigram centered on it; a 9-label CRF over
// {B, I, E, S} x {inside sentence, sentence end} + O decodes the spans.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "deplima/archive.h"
#include "deplima/conllu.h"
#include "deplima/crf.h"
#include "deplima/error.h"
#include "deplima/graph.h"
#include "deplima/rnn.h"
#include "deplima/training.h"

namespace deplima {

class Rng;

enum class SegmenterErrc { kEmptyCorpus, kMissingRawText, kEmptyTrainingSet, kBadModel };
using SegmenterError = KindedError<SegmenterErrc>;

enum SegLabel : std::size_t {
  kSegB = 0,
  kSegI,
  kSegE,
  kSegS,
  kSegBEos,
  kSegIEos,
  kSegEEos,
  kSegSEos,
  kSegO,
};
inline constexpr std::size_t kSegLabelCount = 9;

// min(64, max(8, ceil(4 log2(1 + V)))).
std::size_t DimRule(std::size_t vocab_size);

struct CharNgramVocab {
  // Pads the text on both sides.
  static constexpr char32_t kBoundary = U'\u0002';

  // index[n - 1] maps n-grams to 0..V_n-1; row V_n is the unknown row.
  std::array<std::unordered_map<std::u32string, std::size_t>, 3> index;

  std::size_t count(std::size_t order) const { return index[order - 1].size(); }
  std::size_t dim(std::size_t order) const { return DimRule(count(order)); }
  std::size_t input_dim() const { return dim(1) + dim(2) + dim(3); }
  std::size_t Id(std::size_t order, const std::u32string &gram) const;

  // "order TAB escaped n-gram TAB index" per line.
  std::string ToText() const;
  static CharNgramVocab FromText(std::string_view text);
};

// Every character, plus every 2- and 3-gram of each text padded with one
// boundary symbol per side. Throws kEmptyCorpus.
CharNgramVocab BuildCharVocab(const std::vector<std::string> &corpus);

// Row ids per position: unigram t, bigram (t-1, t), trigram (t-1, t, t+1).
std::array<std::vector<std::size_t>, 3> CharNgramIds(const CharNgramVocab &vocab,
                                                     std::u32string_view text);

struct SegmenterModel {
  CharNgramVocab vocab;
  std::array<nn::Var, 3> embeddings;  // [V_n + 1, d_n]
  nn::BiRnnParams rnn;
  nn::Var projection;  // [2h, 9]
  nn::CrfParams crf;

  std::vector<nn::Var> Parameters() const;
  nn::ModelArchive ToArchive() const;
  static SegmenterModel FromArchive(const nn::ModelArchive &archive);  // kBadModel
  void Save(const std::string &path) const { ToArchive().Save(path); }
  static SegmenterModel Load(const std::string &path);
};

SegmenterModel MakeSegmenter(CharNgramVocab vocab, std::size_t hidden, Rng &rng);

// [n, 9] emission scores for the given per-position ids.
nn::Var SegmenterEmissions(const SegmenterModel &model,
                           const std::array<std::vector<std::size_t>, 3> &ids);
nn::Var SegmenterLoss(const SegmenterModel &model, std::u32string_view text,
                      std::span<const std::size_t> gold_tags);

struct Segmentation {
  std::vector<TokenSpan> tokens;             // code point offsets
  std::vector<std::size_t> sentence_breaks;  // indices of sentence-final tokens
};

// Gold tags for `length` characters from token spans (code point offsets)
// and per-token sentence-final flags.
std::vector<std::size_t> SegTagsFromSpans(std::size_t length, std::span<const TokenSpan> tokens,
                                          const std::vector<bool> &sentence_final);

// Spans from a tag sequence with repair: an I or E outside a token becomes
// S, B and S close any open token, O closes it. A token ends a sentence
// when its last character carries an end-of-sentence label; the last token
// always does.
Segmentation DecodeSegTags(std::u32string_view text, std::span<const std::size_t> tags);

std::vector<std::size_t> SegmenterTags(const SegmenterModel &model, std::u32string_view text);
Segmentation Segment(const SegmenterModel &model, std::string_view text);

// Surface tokens of a gold sentence (multiword ranges stand for their
// words) aligned to its "# text" comment, in code points.
std::vector<TokenSpan> SurfaceTokenSpans(const ConlluSentence &sentence);

// Hyperparameters: hidden (32), epochs (8), lr (0.004), chunk (3
// sentences per training sequence), unk_rate (0.02), clip (5).
SegmenterModel TrainSegmenter(const ConlluDocument &gold, const Hyper &hyper,
                              std::uint64_t seed, const ConlluDocument *dev = nullptr,
                              TrainingLog *log = nullptr);

}  // namespace deplima

#endif  // DEPLIMA_SEGMENTER_H_
