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

#include "deplima/segmenter.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "deplima/log.h"
#include "deplima/optimizer.h"
#include "deplima/rng.h"
#include "deplima/utf8.h"

namespace deplima {

using nn::Var;

namespace {

const char *const kOrderNames[3] = {"seg/uni", "seg/bi", "seg/tri"};

std::u32string Padded(std::u32string_view text) {
  std::u32string p;
  p.reserve(text.size() + 2);
  p.push_back(CharNgramVocab::kBoundary);
  p.append(text);
  p.push_back(CharNgramVocab::kBoundary);
  return p;
}

bool IsEos(std::size_t tag) { return tag >= kSegBEos && tag <= kSegSEos; }

struct Sequence {
  std::u32string text;
  std::vector<std::size_t> tags;
};

// Chunks of `chunk` consecutive sentences joined by one space.
std::vector<Sequence> BuildSequences(const ConlluDocument &doc, std::size_t chunk) {
  std::vector<Sequence> out;
  std::vector<TokenSpan> spans;
  std::vector<bool> finals;
  std::u32string text;
  std::size_t in_chunk = 0;
  auto flush = [&] {
    if (in_chunk == 0) return;
    out.push_back({text, SegTagsFromSpans(text.size(), spans, finals)});
    spans.clear();
    finals.clear();
    text.clear();
    in_chunk = 0;
  };
  for (const auto &s : doc.sentences) {
    std::vector<TokenSpan> local = SurfaceTokenSpans(s);
    if (local.empty()) continue;
    if (!text.empty()) text.push_back(U' ');
    const std::size_t base = text.size();
    text += utf8::Decode(*s.Text());
    for (std::size_t i = 0; i < local.size(); ++i) {
      local[i].char_start += base;
      local[i].char_end += base;
      spans.push_back(std::move(local[i]));
      finals.push_back(i + 1 == local.size());
    }
    if (++in_chunk == chunk) flush();
  }
  flush();
  return out;
}

std::array<std::vector<std::size_t>, 3> DropToUnknown(
    std::array<std::vector<std::size_t>, 3> ids, const CharNgramVocab &vocab, double rate,
    Rng &rng) {
  if (rate <= 0.0) return ids;
  for (std::size_t n = 0; n < 3; ++n) {
    for (auto &id : ids[n]) {
      if (rng.Uniform() < rate) id = vocab.count(n + 1);
    }
  }
  return ids;
}

double TagAccuracy(const SegmenterModel &model, const std::vector<Sequence> &seqs) {
  std::size_t right = 0, total = 0;
  for (const auto &s : seqs) {
    const auto tags = SegmenterTags(model, s.text);
    for (std::size_t i = 0; i < tags.size(); ++i) right += tags[i] == s.tags[i];
    total += tags.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(right) / total;
}

}  // namespace

std::size_t DimRule(std::size_t vocab_size) {
  const double raw = std::ceil(4.0 * std::log2(1.0 + static_cast<double>(vocab_size)));
  return std::min<std::size_t>(64, std::max<std::size_t>(8, static_cast<std::size_t>(raw)));
}

std::size_t CharNgramVocab::Id(std::size_t order, const std::u32string &gram) const {
  const auto &m = index[order - 1];
  auto it = m.find(gram);
  return it == m.end() ? m.size() : it->second;
}

std::string CharNgramVocab::ToText() const {
  std::string out;
  for (std::size_t n = 0; n < 3; ++n) {
    std::vector<std::pair<std::size_t, const std::u32string *>> rows;
    for (const auto &[gram, id] : index[n]) rows.emplace_back(id, &gram);
    std::sort(rows.begin(), rows.end());
    for (const auto &[id, gram] : rows) {
      out += std::to_string(n + 1) + '\t' + utf8::EscapeField(utf8::Encode(*gram)) + '\t' +
             std::to_string(id) + '\n';
    }
  }
  return out;
}

CharNgramVocab CharNgramVocab::FromText(std::string_view text) {
  CharNgramVocab v;
  for (const auto &line : utf8::Split(text, '\n')) {
    if (line.empty()) continue;
    const auto cols = utf8::Split(line, '\t');
    if (cols.size() != 3 || cols[0].size() != 1 || cols[0][0] < '1' || cols[0][0] > '3')
      throw SegmenterError(SegmenterErrc::kBadModel, "bad vocabulary line: " + line);
    auto &m = v.index[cols[0][0] - '1'];
    std::size_t id = 0;
    try {
      id = std::stoul(cols[2]);
    } catch (const std::exception &) {
      throw SegmenterError(SegmenterErrc::kBadModel, "bad vocabulary index: " + line);
    }
    if (id != m.size())
      throw SegmenterError(SegmenterErrc::kBadModel, "vocabulary indices out of order");
    const std::u32string gram = utf8::Decode(utf8::UnescapeField(cols[1]));
    if (gram.size() != static_cast<std::size_t>(cols[0][0] - '0') || !m.emplace(gram, id).second)
      throw SegmenterError(SegmenterErrc::kBadModel, "bad vocabulary entry: " + line);
  }
  return v;
}

CharNgramVocab BuildCharVocab(const std::vector<std::string> &corpus) {
  CharNgramVocab v;
  bool any = false;
  for (const auto &text : corpus) {
    if (text.empty()) continue;
    any = true;
    const std::u32string p = Padded(utf8::Decode(text));
    for (std::size_t i = 1; i + 1 < p.size(); ++i) v.index[0].emplace(p.substr(i, 1), v.index[0].size());
    for (std::size_t n = 2; n <= 3; ++n) {
      auto &m = v.index[n - 1];
      for (std::size_t i = 0; i + n <= p.size(); ++i) m.emplace(p.substr(i, n), m.size());
    }
  }
  if (!any) throw SegmenterError(SegmenterErrc::kEmptyCorpus, "no text to build a vocabulary");
  return v;
}

std::array<std::vector<std::size_t>, 3> CharNgramIds(const CharNgramVocab &vocab,
                                                     std::u32string_view text) {
  const std::u32string p = Padded(text);
  std::array<std::vector<std::size_t>, 3> ids;
  for (auto &v : ids) v.reserve(text.size());
  for (std::size_t t = 0; t < text.size(); ++t) {
    ids[0].push_back(vocab.Id(1, p.substr(t + 1, 1)));
    ids[1].push_back(vocab.Id(2, p.substr(t, 2)));
    ids[2].push_back(vocab.Id(3, p.substr(t, 3)));
  }
  return ids;
}

std::vector<Var> SegmenterModel::Parameters() const {
  std::vector<Var> out(embeddings.begin(), embeddings.end());
  for (const auto &p : rnn.Parameters()) out.push_back(p);
  out.push_back(projection);
  out.push_back(crf.transitions);
  return out;
}

nn::ModelArchive SegmenterModel::ToArchive() const {
  nn::ModelArchive a;
  a.PutText("seg/vocab", vocab.ToText());
  for (std::size_t n = 0; n < 3; ++n) a.PutVar(kOrderNames[n], embeddings[n]);
  nn::PutBiRnn(a, "seg/rnn", rnn);
  a.PutVar("seg/proj", projection);
  a.PutVar("seg/crf", crf.transitions);
  return a;
}

SegmenterModel SegmenterModel::FromArchive(const nn::ModelArchive &archive) {
  try {
    SegmenterModel m;
    m.vocab = CharNgramVocab::FromText(archive.GetText("seg/vocab"));
    for (std::size_t n = 0; n < 3; ++n) {
      m.embeddings[n] = archive.GetParameter(kOrderNames[n],
                                             {m.vocab.count(n + 1) + 1, m.vocab.dim(n + 1)});
    }
    m.rnn = nn::GetBiRnn(archive, "seg/rnn");
    if (m.rnn.input_dim() != m.vocab.input_dim())
      throw SegmenterError(SegmenterErrc::kBadModel, "recurrent input size mismatch");
    m.projection = archive.GetParameter("seg/proj", {m.rnn.output_dim(), kSegLabelCount});
    m.crf.transitions = archive.GetParameter("seg/crf", {kSegLabelCount, kSegLabelCount});
    return m;
  } catch (const nn::NumericsError &e) {
    throw SegmenterError(SegmenterErrc::kBadModel, e.what());
  }
}

SegmenterModel SegmenterModel::Load(const std::string &path) {
  return FromArchive(nn::ModelArchive::Load(path));
}

SegmenterModel MakeSegmenter(CharNgramVocab vocab, std::size_t hidden, Rng &rng) {
  SegmenterModel m;
  m.vocab = std::move(vocab);
  for (std::size_t n = 0; n < 3; ++n) {
    m.embeddings[n] = nn::Parameter(
        nn::XavierUniform({m.vocab.count(n + 1) + 1, m.vocab.dim(n + 1)}, rng));
  }
  m.rnn = nn::MakeBiRnn(m.vocab.input_dim(), hidden, rng);
  m.projection = nn::Parameter(nn::XavierUniform({m.rnn.output_dim(), kSegLabelCount}, rng));
  m.crf = nn::MakeCrf(kSegLabelCount, rng);
  return m;
}

Var SegmenterEmissions(const SegmenterModel &model,
                       const std::array<std::vector<std::size_t>, 3> &ids) {
  std::vector<Var> parts;
  for (std::size_t n = 0; n < 3; ++n) parts.push_back(nn::GatherRows(model.embeddings[n], ids[n]));
  const std::vector<Var> inputs = nn::Unstack(nn::ConcatColumns(parts));
  const std::vector<Var> states = nn::BiRnnForward(model.rnn, inputs);
  return nn::ProjectRows(nn::Stack(states), model.projection);
}

Var SegmenterLoss(const SegmenterModel &model, std::u32string_view text,
                  std::span<const std::size_t> gold_tags) {
  return nn::CrfNll(SegmenterEmissions(model, CharNgramIds(model.vocab, text)),
                    model.crf.transitions, gold_tags);
}

std::vector<std::size_t> SegTagsFromSpans(std::size_t length, std::span<const TokenSpan> tokens,
                                          const std::vector<bool> &sentence_final) {
  std::vector<std::size_t> tags(length, kSegO);
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const auto &t = tokens[k];
    const std::size_t shift = k < sentence_final.size() && sentence_final[k] ? 4 : 0;
    if (t.char_end - t.char_start == 1) {
      tags[t.char_start] = kSegS + shift;
      continue;
    }
    for (std::size_t i = t.char_start; i < t.char_end; ++i) {
      const std::size_t base = i == t.char_start ? kSegB : i + 1 == t.char_end ? kSegE : kSegI;
      tags[i] = base + shift;
    }
  }
  return tags;
}

Segmentation DecodeSegTags(std::u32string_view text, std::span<const std::size_t> tags) {
  Segmentation out;
  std::vector<bool> finals;
  auto emit = [&](std::size_t begin, std::size_t end) {
    out.tokens.push_back({utf8::Encode(text.substr(begin, end - begin)), begin, end});
    finals.push_back(IsEos(tags[end - 1]));
  };
  bool open = false;
  std::size_t start = 0;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    const std::size_t tag = tags[t];
    const std::size_t base = tag == kSegO ? kSegO : tag % 4;
    if (base == kSegO || base == kSegB || base == kSegS) {
      if (open) emit(start, t);
      open = false;
    }
    if (base == kSegB) {
      open = true;
      start = t;
    } else if (base == kSegS || ((base == kSegI || base == kSegE) && !open)) {
      emit(t, t + 1);
    } else if (base == kSegE) {
      emit(start, t + 1);
      open = false;
    }
  }
  if (open) emit(start, tags.size());
  if (!finals.empty()) finals.back() = true;
  for (std::size_t i = 0; i < finals.size(); ++i) {
    if (finals[i]) out.sentence_breaks.push_back(i);
  }
  return out;
}

std::vector<std::size_t> SegmenterTags(const SegmenterModel &model, std::u32string_view text) {
  if (text.empty()) return {};
  nn::NoGradScope no_grad;
  const Var em = SegmenterEmissions(model, CharNgramIds(model.vocab, text));
  return nn::ViterbiDecode(em.tensor(), model.crf.transitions.tensor());
}

Segmentation Segment(const SegmenterModel &model, std::string_view text) {
  const std::u32string cps = utf8::Decode(text);
  const auto tags = SegmenterTags(model, cps);
  return DecodeSegTags(cps, tags);
}

std::vector<TokenSpan> SurfaceTokenSpans(const ConlluSentence &sentence) {
  const auto raw = sentence.Text();
  if (!raw) throw SegmenterError(SegmenterErrc::kMissingRawText, "sentence without # text");
  const std::u32string text = utf8::Decode(*raw);
  std::vector<TokenSpan> spans;
  std::size_t pos = 0;
  int covered = 0;
  for (const auto &tok : sentence.tokens) {
    if (!tok.is_range && tok.first <= covered) continue;
    if (tok.is_range) covered = tok.last;
    const std::u32string form = utf8::Decode(tok.form);
    while (pos < text.size() && utf8::IsSpace(text[pos])) ++pos;
    if (form.empty() || text.compare(pos, form.size(), form) != 0)
      throw SegmenterError(SegmenterErrc::kMissingRawText,
                           "token '" + tok.form + "' does not align with # text");
    spans.push_back({tok.form, pos, pos + form.size()});
    pos += form.size();
  }
  return spans;
}

SegmenterModel TrainSegmenter(const ConlluDocument &gold, const Hyper &hyper, std::uint64_t seed,
                              const ConlluDocument *dev, TrainingLog *log) {
  const std::size_t hidden = hyper.Size("hidden", 32);
  const std::size_t epochs = hyper.Size("epochs", 8);
  const double lr = hyper.Real("lr", 0.004);
  const std::size_t chunk = std::max<std::size_t>(1, hyper.Size("chunk", 3));
  const double unk_rate = hyper.Real("unk_rate", 0.02);
  const double clip = hyper.Real("clip", 5.0);
  hyper.CheckAllUsed();

  std::vector<Sequence> train = BuildSequences(gold, chunk);
  if (train.empty())
    throw SegmenterError(SegmenterErrc::kEmptyTrainingSet, "no tokenized sentences");
  std::vector<Sequence> held;
  if (dev) held = BuildSequences(*dev, chunk);

  std::vector<std::string> corpus;
  for (const auto &s : train) corpus.push_back(utf8::Encode(s.text));
  Rng rng(seed);
  SegmenterModel model = MakeSegmenter(BuildCharVocab(corpus), hidden, rng);
  const std::vector<Var> params = model.Parameters();
  nn::Adam adam({.learning_rate = lr, .clip_norm = clip});
  nn::ZeroGrads(params);

  std::vector<std::vector<double>> best;
  double best_metric = -1.0;
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    rng.Shuffle(order);
    double total = 0.0;
    for (std::size_t i : order) {
      const auto ids = DropToUnknown(CharNgramIds(model.vocab, train[i].text), model.vocab,
                                     unk_rate, rng);
      const Var loss = nn::CrfNll(SegmenterEmissions(model, ids), model.crf.transitions,
                                  train[i].tags);
      total += loss.scalar();
      loss.Backward();
      adam.Step(params);
    }
    EpochRecord rec{epoch, total / train.size()};
    if (!held.empty()) {
      rec.dev_metric = TagAccuracy(model, held);
      if (rec.dev_metric > best_metric) {
        best_metric = rec.dev_metric;
        best.clear();
        for (const auto &p : params) best.push_back(p.values());
      }
    }
    LogMessage(LogLevel::kDebug, "segmenter epoch " + std::to_string(epoch) + " loss " +
                                    std::to_string(rec.loss));
    if (log) log->push_back(rec);
  }
  std::vector<Var> owned = params;
  for (std::size_t i = 0; i < best.size(); ++i) owned[i].tensor().values = best[i];
  for (auto &p : owned) p.tensor().grad.clear();
  return model;
}

}  // namespace deplima
