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

#ifndef DEPLIMA_EVAL_H_
#define DEPLIMA_EVAL_H_

// Scorers for UD annotation, entity spans and segmentation, and pipeline
// throughput measurement.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "deplima/conllu.h"
#include "deplima/error.h"
#include "deplima/ner.h"
#include "deplima/pipeline.h"
#include "deplima/segmenter.h"

namespace deplima {

enum class EvalErrc { kSentenceCountMismatch, kTokenCountMismatch, kEmptyCorpus };
using EvalError = KindedError<EvalErrc>;

struct UdScores {
  double upos = 0.0;
  double ufeats = 0.0;
  double lemma = 0.0;
  double uas = 0.0;
  double las = 0.0;
  std::size_t token_count = 0;
};

// Word-by-word comparison; both documents must have the same sentences
// and word counts. FEATS compare as sets, lemmas exactly. An empty
// document scores 1.0 everywhere.
UdScores ScoreUd(const ConlluDocument &gold, const ConlluDocument &pred);

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;
};
// 0 for an empty denominator.
PrfScore MakePrf(std::size_t correct, std::size_t gold, std::size_t predicted);

struct NerScores {
  std::map<EntityType, PrfScore> per_type;  // types present in gold or pred
  PrfScore overall;                         // micro-averaged
};
// Exact span and type match.
NerScores ScoreNer(const std::vector<std::vector<EntitySpan>> &gold,
                   const std::vector<std::vector<EntitySpan>> &pred);

struct SegmentationScores {
  PrfScore tokens;     // exact character spans
  PrfScore sentences;  // sentence end offsets
};
SegmentationScores ScoreSegmentation(const Segmentation &gold, const Segmentation &pred);

// Sentence texts joined by one space, and the surface tokens and sentence
// breaks of the document over that text.
std::string JoinedText(const ConlluDocument &doc);
Segmentation GoldSegmentation(const ConlluDocument &doc);

// Accuracy on `test` of tagging each form with its most frequent UPOS in
// `train`, unseen forms with the overall most frequent UPOS.
double MostFrequentTagAccuracy(const ConlluDocument &train, const ConlluDocument &test);

struct SpeedReport {
  std::size_t tokens = 0;
  double seconds = 0.0;
  double tokens_per_second = 0.0;
};
double TokensPerSecond(std::size_t tokens, double seconds);
// Tokens of a pipeline result: the token graph when present, else the
// CoNLL-U output words.
std::size_t CountOutputTokens(const AnalysisData &result);
// Runs the first document once untimed, then times the whole corpus,
// single-threaded. Throws kEmptyCorpus.
SpeedReport MeasureSpeed(const Pipeline &pipeline, const std::vector<AnalysisData> &corpus);

// Fixed-order "metric value" table and a one-line key=value form, values
// to 4 decimals.
std::string FormatUdTable(const UdScores &s);
std::string FormatUdKeyValues(const UdScores &s);
std::string FormatNerTable(const NerScores &s);
std::string FormatNerKeyValues(const NerScores &s);

}  // namespace deplima

#endif  // DEPLIMA_EVAL_H_
