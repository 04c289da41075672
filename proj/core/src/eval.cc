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

#include "deplima/eval.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>
#include <unordered_map>
#include <utility>

#include "deplima/utf8.h"

namespace deplima {

namespace {

std::string Fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

double Ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

UdScores ScoreUd(const ConlluDocument &gold, const ConlluDocument &pred) {
  if (gold.sentences.size() != pred.sentences.size())
    throw EvalError(EvalErrc::kSentenceCountMismatch,
                    std::to_string(gold.sentences.size()) + " gold vs " +
                        std::to_string(pred.sentences.size()) + " predicted sentences");
  std::size_t n = 0, upos = 0, feats = 0, lemma = 0, uas = 0, las = 0;
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    const auto g = gold.sentences[s].Words();
    const auto p = pred.sentences[s].Words();
    if (g.size() != p.size())
      throw EvalError(EvalErrc::kTokenCountMismatch,
                      "sentence " + std::to_string(s + 1) + ": " + std::to_string(g.size()) +
                          " gold vs " + std::to_string(p.size()) + " predicted words");
    for (std::size_t i = 0; i < g.size(); ++i, ++n) {
      upos += g[i]->upos == p[i]->upos;
      feats += g[i]->feats == p[i]->feats;
      lemma += g[i]->lemma == p[i]->lemma;
      const bool head = g[i]->head == p[i]->head;
      uas += head;
      las += head && g[i]->deprel == p[i]->deprel;
    }
  }
  return {Ratio(upos, n), Ratio(feats, n), Ratio(lemma, n), Ratio(uas, n), Ratio(las, n), n};
}

PrfScore MakePrf(std::size_t correct, std::size_t gold, std::size_t predicted) {
  PrfScore s;
  s.gold = gold;
  s.predicted = predicted;
  s.correct = correct;
  s.precision = predicted == 0 ? 0.0 : static_cast<double>(correct) / predicted;
  s.recall = gold == 0 ? 0.0 : static_cast<double>(correct) / gold;
  s.f1 = s.precision + s.recall == 0.0
             ? 0.0
             : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

NerScores ScoreNer(const std::vector<std::vector<EntitySpan>> &gold,
                   const std::vector<std::vector<EntitySpan>> &pred) {
  if (gold.size() != pred.size())
    throw EvalError(EvalErrc::kSentenceCountMismatch,
                    std::to_string(gold.size()) + " gold vs " + std::to_string(pred.size()) +
                        " predicted sentences");
  struct Counts {
    std::size_t correct = 0, gold = 0, pred = 0;
  };
  std::map<EntityType, Counts> by_type;
  Counts all;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const std::set<EntitySpan> g(gold[s].begin(), gold[s].end());
    const std::set<EntitySpan> p(pred[s].begin(), pred[s].end());
    for (const auto &sp : g) ++by_type[sp.type].gold, ++all.gold;
    for (const auto &sp : p) {
      ++by_type[sp.type].pred;
      ++all.pred;
      if (g.contains(sp)) ++by_type[sp.type].correct, ++all.correct;
    }
  }
  NerScores out;
  for (const auto &[t, c] : by_type) out.per_type[t] = MakePrf(c.correct, c.gold, c.pred);
  out.overall = MakePrf(all.correct, all.gold, all.pred);
  return out;
}

SegmentationScores ScoreSegmentation(const Segmentation &gold, const Segmentation &pred) {
  auto spans = [](const Segmentation &s) {
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (const auto &t : s.tokens) out.insert({t.char_start, t.char_end});
    return out;
  };
  auto ends = [](const Segmentation &s) {
    std::set<std::size_t> out;
    for (std::size_t b : s.sentence_breaks) {
      if (b < s.tokens.size()) out.insert(s.tokens[b].char_end);
    }
    return out;
  };
  auto score = [](const auto &g, const auto &p) {
    std::size_t correct = 0;
    for (const auto &x : p) correct += g.count(x);
    return MakePrf(correct, g.size(), p.size());
  };
  return {score(spans(gold), spans(pred)), score(ends(gold), ends(pred))};
}

std::string JoinedText(const ConlluDocument &doc) {
  std::string out;
  for (const auto &s : doc.sentences) {
    if (!out.empty()) out += ' ';
    out += s.Text().value_or("");
  }
  return out;
}

Segmentation GoldSegmentation(const ConlluDocument &doc) {
  Segmentation seg;
  std::size_t base = 0;
  for (const auto &s : doc.sentences) {
    const std::vector<TokenSpan> spans = SurfaceTokenSpans(s);
    for (TokenSpan t : spans) {
      t.char_start += base;
      t.char_end += base;
      seg.tokens.push_back(std::move(t));
    }
    if (!spans.empty()) seg.sentence_breaks.push_back(seg.tokens.size() - 1);
    base += utf8::Decode(s.Text().value_or("")).size() + 1;
  }
  return seg;
}

double MostFrequentTagAccuracy(const ConlluDocument &train, const ConlluDocument &test) {
  std::unordered_map<std::string, std::map<std::string, std::size_t>> by_form;
  std::map<std::string, std::size_t> overall;
  for (const auto &s : train.sentences) {
    for (const auto *w : s.Words()) {
      ++by_form[w->form][w->upos];
      ++overall[w->upos];
    }
  }
  auto best = [](const std::map<std::string, std::size_t> &counts) {
    std::string tag;
    std::size_t top = 0;
    for (const auto &[t, c] : counts) {
      if (c > top) top = c, tag = t;
    }
    return tag;
  };
  const std::string fallback = best(overall);
  std::size_t n = 0, right = 0;
  for (const auto &s : test.sentences) {
    for (const auto *w : s.Words()) {
      auto it = by_form.find(w->form);
      right += (it == by_form.end() ? fallback : best(it->second)) == w->upos;
      ++n;
    }
  }
  return Ratio(right, n);
}

double TokensPerSecond(std::size_t tokens, double seconds) {
  return seconds > 0.0 ? static_cast<double>(tokens) / seconds : 0.0;
}

std::size_t CountOutputTokens(const AnalysisData &result) {
  if (result.Has(kTokenGraphLayer))
    return result.Get<AnalysisGraph>(kTokenGraphLayer).token_count();
  if (result.Has(kConlluOutputLayer)) {
    const Layer &layer = result.Get(kConlluOutputLayer);
    if (const auto *doc = std::get_if<ConlluDocument>(&layer)) return doc->WordCount();
    return ParseConllu(std::get<std::string>(layer)).WordCount();
  }
  return 0;
}

SpeedReport MeasureSpeed(const Pipeline &pipeline, const std::vector<AnalysisData> &corpus) {
  if (corpus.empty()) throw EvalError(EvalErrc::kEmptyCorpus, "no documents to time");
  pipeline.Run(corpus.front());
  SpeedReport r;
  const auto start = std::chrono::steady_clock::now();
  for (const auto &doc : corpus) r.tokens += CountOutputTokens(pipeline.Run(doc));
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.tokens_per_second = TokensPerSecond(r.tokens, r.seconds);
  return r;
}

namespace {

struct UdRow {
  const char *label;
  const char *key;
  double value;
};

std::vector<UdRow> UdRows(const UdScores &s) {
  return {{"UPOS", "upos", s.upos},
          {"UFeats", "ufeats", s.ufeats},
          {"Lemmas", "lemmas", s.lemma},
          {"UAS", "uas", s.uas},
          {"LAS", "las", s.las}};
}

}  // namespace

std::string FormatUdTable(const UdScores &s) {
  std::string out = "metric  value\n";
  for (const auto &r : UdRows(s)) {
    std::string label = r.label;
    label.resize(8, ' ');
    out += label + Fixed4(r.value) + '\n';
  }
  return out + "tokens  " + std::to_string(s.token_count) + '\n';
}

std::string FormatUdKeyValues(const UdScores &s) {
  std::string out;
  for (const auto &r : UdRows(s)) out += std::string(r.key) + '=' + Fixed4(r.value) + ' ';
  return out + "tokens=" + std::to_string(s.token_count) + '\n';
}

std::string FormatNerTable(const NerScores &s) {
  std::string out = "type           precision  recall  f1\n";
  auto row = [&](std::string name, const PrfScore &p) {
    name.resize(15, ' ');
    out += name + Fixed4(p.precision) + "     " + Fixed4(p.recall) + "  " + Fixed4(p.f1) + '\n';
  };
  for (const auto &[t, p] : s.per_type) row(std::string(EntityTypeName(t)), p);
  row("All", s.overall);
  return out;
}

std::string FormatNerKeyValues(const NerScores &s) {
  std::string out = "precision=" + Fixed4(s.overall.precision) +
                    " recall=" + Fixed4(s.overall.recall) + " f1=" + Fixed4(s.overall.f1);
  for (const auto &[t, p] : s.per_type) {
    out += ' ' + std::string(EntityTypeName(t)) + ".f1=" + Fixed4(p.f1);
  }
  return out + '\n';
}

}  // namespace deplima
