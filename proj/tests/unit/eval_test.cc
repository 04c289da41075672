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

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "deplima/conllu.h"
#include "deplima/eval.h"
#include "deplima/ner.h"
#include "deplima/units.h"
#include "support/toy_models.h"
#include "support/toy_treebank.h"

namespace deplima {
namespace {

constexpr char kTwoWords[] =
    "# text = a b\n"
    "1\ta\ta\tDET\t_\tDefinite=Def\t2\tdet\t_\t_\n"
    "2\tb\tb\tNOUN\t_\t_\t0\troot\t_\t_\n\n";

TEST(ScoreUd, Identity) {
  const ConlluDocument gold = testing::MakeToyTreebank(20, 3);
  const UdScores s = ScoreUd(gold, gold);
  EXPECT_EQ(s.token_count, gold.WordCount());
  for (double v : {s.upos, s.ufeats, s.lemma, s.uas, s.las}) EXPECT_EQ(v, 1.0);
}

TEST(ScoreUd, HandCountedExample) {
  const ConlluDocument gold = ParseConllu(kTwoWords);
  ConlluDocument pred = gold;
  auto w = pred.sentences[0].Words();
  const_cast<ConlluToken *>(w[0])->head = 0;
  const_cast<ConlluToken *>(w[0])->upos = "PRON";
  const_cast<ConlluToken *>(w[1])->deprel = "obj";
  const_cast<ConlluToken *>(w[1])->feats = {{"Number", "Sing"}};
  const UdScores s = ScoreUd(gold, pred);
  EXPECT_DOUBLE_EQ(s.upos, 0.5);
  EXPECT_DOUBLE_EQ(s.ufeats, 0.5);
  EXPECT_DOUBLE_EQ(s.lemma, 1.0);
  EXPECT_DOUBLE_EQ(s.uas, 0.5);
  EXPECT_DOUBLE_EQ(s.las, 0.0);
  EXPECT_EQ(s.token_count, 2u);
}

TEST(ScoreUd, Mismatches) {
  const ConlluDocument gold = testing::MakeToyTreebank(3, 4);
  ConlluDocument fewer = gold;
  fewer.sentences.pop_back();
  try {
    ScoreUd(gold, fewer);
    FAIL();
  } catch (const EvalError &e) {
    EXPECT_EQ(e.kind(), EvalErrc::kSentenceCountMismatch);
  }
  ConlluDocument shorter = gold;
  shorter.sentences[1].tokens.pop_back();
  try {
    ScoreUd(gold, shorter);
    FAIL();
  } catch (const EvalError &e) {
    EXPECT_EQ(e.kind(), EvalErrc::kTokenCountMismatch);
  }
}

TEST(ScoreUd, LasNeverExceedsUas) {
  std::mt19937_64 rng(9);
  const ConlluDocument gold = testing::MakeToyTreebank(30, 5);
  for (int trial = 0; trial < 20; ++trial) {
    ConlluDocument pred = gold;
    for (auto &s : pred.sentences) {
      for (const auto *cw : s.Words()) {
        auto *w = const_cast<ConlluToken *>(cw);
        if (rng() % 3 == 0) w->head = static_cast<int>(rng() % 4);
        if (rng() % 3 == 0) w->deprel = "dep";
      }
    }
    const UdScores s = ScoreUd(gold, pred);
    EXPECT_LE(s.las, s.uas);
    EXPECT_GE(s.las, 0.0);
    EXPECT_LE(s.uas, 1.0);
  }
}

using Spans = std::vector<std::vector<EntitySpan>>;

TEST(ScoreNer, HalfRightExample) {
  const Spans gold = {{{EntityType::kPerson, 0, 2}, {EntityType::kLocation, 3, 4}}};
  const Spans pred = {{{EntityType::kPerson, 0, 2}, {EntityType::kLocation, 3, 5}}};
  const NerScores s = ScoreNer(gold, pred);
  EXPECT_DOUBLE_EQ(s.overall.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.overall.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.overall.f1, 0.5);
  EXPECT_DOUBLE_EQ(s.per_type.at(EntityType::kPerson).f1, 1.0);
  EXPECT_DOUBLE_EQ(s.per_type.at(EntityType::kLocation).f1, 0.0);
}

TEST(ScoreNer, EmptyPredictionScoresZero) {
  const Spans gold = {{{EntityType::kOrganization, 1, 2}}};
  const NerScores s = ScoreNer(gold, Spans{{}});
  EXPECT_EQ(s.overall.f1, 0.0);
  EXPECT_EQ(s.overall.precision, 0.0);
  EXPECT_EQ(s.overall.gold, 1u);
  try {
    ScoreNer(gold, Spans{});
    FAIL();
  } catch (const EvalError &e) {
    EXPECT_EQ(e.kind(), EvalErrc::kSentenceCountMismatch);
  }
}

std::vector<EntitySpan> RandomSpans(std::mt19937_64 &rng, std::size_t length) {
  std::vector<EntitySpan> out;
  std::size_t i = 0;
  while (i < length) {
    if (rng() % 3 == 0) {
      const std::size_t end = std::min(length, i + 1 + rng() % 3);
      out.push_back({kNeuralEntityTypes[rng() % kNeuralEntityTypes.size()], i, end});
      i = end;
    } else {
      ++i;
    }
  }
  return out;
}

// Pairwise count without set deduplication.
std::size_t CountExactMatches(const std::vector<EntitySpan> &g, const std::vector<EntitySpan> &p) {
  std::size_t n = 0;
  for (const auto &a : p) {
    for (const auto &b : g) n += a.type == b.type && a.start == b.start && a.end == b.end;
  }
  return n;
}

TEST(ScoreNer, MatchesPairwiseCountAndIsSwapSymmetric) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    Spans gold, pred;
    std::size_t correct = 0, ng = 0, np = 0;
    for (int s = 0; s < 4; ++s) {
      gold.push_back(RandomSpans(rng, 8));
      pred.push_back(rng() % 2 ? gold.back() : RandomSpans(rng, 8));
      correct += CountExactMatches(gold.back(), pred.back());
      ng += gold.back().size();
      np += pred.back().size();
    }
    const NerScores a = ScoreNer(gold, pred);
    const NerScores b = ScoreNer(pred, gold);
    EXPECT_EQ(a.overall.correct, correct);
    EXPECT_EQ(a.overall.gold, ng);
    EXPECT_EQ(a.overall.predicted, np);
    EXPECT_DOUBLE_EQ(a.overall.f1, b.overall.f1);
    EXPECT_DOUBLE_EQ(a.overall.precision, b.overall.recall);
    const double expected_f1 = ng + np == 0 ? 0.0 : 2.0 * correct / static_cast<double>(ng + np);
    EXPECT_NEAR(a.overall.f1, expected_f1, 1e-12);
  }
}

TEST(ScoreSegmentation, CountsSpansAndSentenceEnds) {
  Segmentation gold{{{"a", 0, 1}, {"bc", 2, 4}, {".", 4, 5}, {"d", 6, 7}}, {2, 3}};
  Segmentation pred{{{"a", 0, 1}, {"b", 2, 3}, {"c.", 3, 5}, {"d", 6, 7}}, {3}};
  const SegmentationScores s = ScoreSegmentation(gold, pred);
  EXPECT_DOUBLE_EQ(s.tokens.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.tokens.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.sentences.precision, 1.0);
  EXPECT_DOUBLE_EQ(s.sentences.recall, 0.5);
  EXPECT_NEAR(s.sentences.f1, 2.0 / 3.0, 1e-12);
}

TEST(ScoreSegmentation, GoldAgainstItselfIsPerfect) {
  const ConlluDocument doc = testing::MakeToyTreebank(10, 6);
  const Segmentation gold = GoldSegmentation(doc);
  EXPECT_EQ(gold.sentence_breaks.size(), doc.sentences.size());
  const std::string text = JoinedText(doc);
  for (const auto &t : gold.tokens) {
    EXPECT_EQ(text.substr(t.char_start, t.char_end - t.char_start), t.surface);
  }
  const SegmentationScores s = ScoreSegmentation(gold, gold);
  EXPECT_EQ(s.tokens.f1, 1.0);
  EXPECT_EQ(s.sentences.f1, 1.0);
}

TEST(Baselines, MostFrequentTag) {
  const ConlluDocument train = ParseConllu(
      "1\tx\t_\tNOUN\t_\t_\t0\troot\t_\t_\n\n"
      "1\tx\t_\tNOUN\t_\t_\t0\troot\t_\t_\n2\tx\t_\tVERB\t_\t_\t1\tdep\t_\t_\n\n");
  const ConlluDocument test = ParseConllu(
      "1\tx\t_\tNOUN\t_\t_\t0\troot\t_\t_\n2\ty\t_\tVERB\t_\t_\t1\tdep\t_\t_\n"
      "3\tx\t_\tVERB\t_\t_\t1\tdep\t_\t_\n\n");
  // y is unseen and falls back to the overall majority NOUN.
  EXPECT_NEAR(MostFrequentTagAccuracy(train, test), 1.0 / 3.0, 1e-12);
}

TEST(Speed, TokensPerSecond) {
  EXPECT_DOUBLE_EQ(TokensPerSecond(1000, 2.0), 500.0);
  EXPECT_EQ(TokensPerSecond(10, 0.0), 0.0);
}

TEST(Speed, MeasuresPipelineOutput) {
  const std::string dir = testing::MakeTempDir("deplima-speed");
  testing::ToyModelOptions o;
  o.sentences = 10;
  o.epochs = 1;
  testing::WriteToyModels(dir, "toy", o);
  ResourceRegistry resources(dir);
  const Pipeline p =
      BuildPipeline(BuiltinPipeline("ner-rules-pretok", "toy"), BuiltinUnits(), resources);
  try {
    MeasureSpeed(p, {});
    FAIL();
  } catch (const EvalError &e) {
    EXPECT_EQ(e.kind(), EvalErrc::kEmptyCorpus);
  }
  const ConlluDocument doc = testing::MakeToyTreebank(8, 7);
  AnalysisData in;
  in.Set(kConlluInputLayer, WriteConllu(doc));
  const SpeedReport r = MeasureSpeed(p, {in, in});
  EXPECT_EQ(r.tokens, 2 * doc.WordCount());
  EXPECT_GT(r.seconds, 0.0);
  EXPECT_NEAR(r.tokens_per_second, r.tokens / r.seconds, 1e-6 * r.tokens_per_second);
  std::filesystem::remove_all(dir);
}

TEST(Reports, Formatting) {
  UdScores s{1.0, 0.5, 0.25, 0.125, 0.0625, 16};
  EXPECT_EQ(FormatUdKeyValues(s),
            "upos=1.0000 ufeats=0.5000 lemmas=0.2500 uas=0.1250 las=0.0625 tokens=16\n");
  const std::string table = FormatUdTable(s);
  EXPECT_EQ(table.substr(0, table.find('\n')), "metric  value");
  EXPECT_NE(table.find("LAS     0.0625\n"), std::string::npos);
  EXPECT_NE(table.find("tokens  16\n"), std::string::npos);

  const NerScores n = ScoreNer({{{EntityType::kPerson, 0, 1}}}, {{{EntityType::kPerson, 0, 1}}});
  const std::string ner = FormatNerTable(n);
  EXPECT_NE(ner.find("Person"), std::string::npos);
  EXPECT_NE(ner.find("All"), std::string::npos);
  EXPECT_NE(FormatNerKeyValues(n).find("1.0000"), std::string::npos);
}

}  // namespace
}  // namespace deplima
