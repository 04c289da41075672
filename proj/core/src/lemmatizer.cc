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

#include "deplima/lemmatizer.h"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>
#include <utility>

#include "deplima/log.h"
#include "deplima/optimizer.h"
#include "deplima/rng.h"
#include "deplima/utf8.h"

namespace deplima {

using nn::Constant;
using nn::Parameter;
using nn::Tensor;
using nn::Var;
using nn::XavierUniform;

namespace {

struct Encoded {
  Var states;  // [n, hidden]; undefined for an empty form
  Var final;
  std::vector<std::size_t> input;  // symbols of the form
};

Encoded Encode(const LemmatizerModel &m, const LemmaKey &key) {
  Encoded e;
  for (char32_t c : utf8::Decode(key.form)) e.input.push_back(m.Symbol(c));
  const Features feats = ParseFeatures(key.feats);
  std::vector<Var> tags;
  for (std::size_t c = 0; c < m.categories.size(); ++c) {
    std::string value;
    if (c == 0) {
      value = key.upos;
    } else if (auto it = feats.find(m.categories[c]); it != feats.end()) {
      value = it->second;
    }
    const auto &vals = m.values[c];
    auto pos = std::find(vals.begin(), vals.end(), value);
    const std::size_t row = value.empty() || pos == vals.end() ? 0 : 1 + (pos - vals.begin());
    tags.push_back(nn::Row(m.tag_tables[c], row));
  }
  Var h = nn::Tanh(nn::Add(nn::MatVec(m.init_w, nn::Concat(tags)), m.init_b));
  if (!e.input.empty()) {
    const std::vector<Var> xs = nn::Unstack(nn::GatherRows(m.char_table, e.input));
    std::vector<Var> states;
    for (const Var &x : xs) {
      h = nn::GruCell(x, h, m.encoder.wx, m.encoder.uh, m.encoder.b);
      states.push_back(h);
    }
    e.states = nn::Stack(states);
  }
  e.final = h;
  return e;
}

// Decoder step: new state and output logits.
std::pair<Var, Var> Step(const LemmatizerModel &m, const Encoded &enc, const Var &h,
                         std::size_t prev, std::size_t j) {
  const std::size_t aligned = j < enc.input.size() ? enc.input[j] : LemmatizerModel::kEos;
  const Var prev_emb = nn::Row(m.char_table, prev);
  const Var aligned_emb = nn::Row(m.char_table, aligned);
  const Var in_parts[] = {prev_emb, aligned_emb};
  const Var next = nn::GruCell(nn::Concat(in_parts), h, m.decoder.wx, m.decoder.uh, m.decoder.b);
  Var ctx;
  if (enc.states.defined()) {
    const Var alpha = nn::Softmax(nn::MatVec(enc.states, next));
    ctx = nn::MatVecT(enc.states, alpha);
  } else {
    ctx = Constant(Tensor({m.encoder.hidden_dim()}));
  }
  const Var out_parts[] = {next, aligned_emb, ctx};
  const Var logits = nn::Add(nn::MatVecT(m.out_w, nn::Concat(out_parts)), m.out_b);
  return {next, logits};
}

std::vector<std::size_t> LemmaTargets(const LemmatizerModel &m, const std::string &lemma) {
  std::vector<std::size_t> t;
  for (char32_t c : utf8::Decode(lemma)) t.push_back(m.Symbol(c));
  t.push_back(LemmatizerModel::kEos);
  return t;
}

}  // namespace

std::vector<LemmaTriple> LemmaTriples(const ConlluDocument &treebank, bool distinct) {
  std::vector<LemmaTriple> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto &s : treebank.sentences) {
    for (const auto *w : s.Words()) {
      LemmaTriple t{LemmaKey::Of(w->form, w->upos, w->feats), w->lemma};
      if (distinct && !seen.emplace(t.key.Serialize(), t.lemma).second) continue;
      out.push_back(std::move(t));
    }
  }
  if (distinct) {
    std::sort(out.begin(), out.end(), [](const LemmaTriple &a, const LemmaTriple &b) {
      return std::make_pair(a.key.Serialize(), a.lemma) < std::make_pair(b.key.Serialize(), b.lemma);
    });
  }
  return out;
}

bool LemmaCache::Find(const std::string &key, std::string *value) const {
  std::shared_lock lock(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) return false;
  *value = it->second;
  return true;
}

void LemmaCache::Insert(const std::string &key, const std::string &value) {
  std::unique_lock lock(mu_);
  map_[key] = value;
}

void LemmaCache::Clear() {
  std::unique_lock lock(mu_);
  map_.clear();
}

std::size_t LemmaCache::size() const {
  std::shared_lock lock(mu_);
  return map_.size();
}

std::size_t LemmatizerModel::Symbol(char32_t c) const {
  auto it = char_index.find(c);
  return it == char_index.end() ? kUnk : it->second;
}

void LemmatizerModel::Index() {
  char_index.clear();
  for (std::size_t i = 0; i < chars.size(); ++i) char_index.emplace(chars[i], kUnk + 1 + i);
}

std::vector<Var> LemmatizerModel::Parameters() const {
  std::vector<Var> out{char_table};
  out.insert(out.end(), tag_tables.begin(), tag_tables.end());
  out.push_back(init_w);
  out.push_back(init_b);
  for (const auto &p : encoder.Parameters()) out.push_back(p);
  for (const auto &p : decoder.Parameters()) out.push_back(p);
  out.push_back(out_w);
  out.push_back(out_b);
  return out;
}

nn::ModelArchive LemmatizerModel::ToArchive() const {
  nn::ModelArchive a;
  std::string cs;
  for (char32_t c : chars) cs += std::to_string(static_cast<std::uint32_t>(c)) + '\n';
  a.PutText("lem/chars", cs);
  std::string tags;
  for (std::size_t c = 0; c < categories.size(); ++c) {
    tags += utf8::EscapeField(categories[c]);
    for (const auto &v : values[c]) tags += '\t' + utf8::EscapeField(v);
    tags += '\n';
  }
  a.PutText("lem/tags", tags);
  a.PutVar("lem/chars", char_table);
  for (std::size_t c = 0; c < tag_tables.size(); ++c)
    a.PutVar("lem/tag" + std::to_string(c), tag_tables[c]);
  a.PutVar("lem/init_w", init_w);
  a.PutVar("lem/init_b", init_b);
  nn::PutGru(a, "lem/encoder", encoder);
  nn::PutGru(a, "lem/decoder", decoder);
  a.PutVar("lem/out_w", out_w);
  a.PutVar("lem/out_b", out_b);
  return a;
}

LemmatizerModel LemmatizerModel::FromArchive(const nn::ModelArchive &a) {
  try {
    LemmatizerModel m;
    for (const auto &l : utf8::Split(a.GetText("lem/chars"), '\n')) {
      if (!l.empty()) m.chars.push_back(static_cast<char32_t>(std::stoul(l)));
    }
    for (const auto &line : utf8::Split(a.GetText("lem/tags"), '\n')) {
      if (line.empty()) continue;
      const auto cols = utf8::Split(line, '\t');
      m.categories.push_back(utf8::UnescapeField(cols[0]));
      std::vector<std::string> vals;
      for (std::size_t i = 1; i < cols.size(); ++i) vals.push_back(utf8::UnescapeField(cols[i]));
      m.values.push_back(std::move(vals));
    }
    if (m.categories.empty())
      throw LemmatizerError(LemmatizerErrc::kBadModel, "lemmatizer without tag categories");
    m.Index();
    const auto &ct = a.GetTensor("lem/chars");
    if (ct.rank() != 2) throw LemmatizerError(LemmatizerErrc::kBadModel, "bad character table");
    const std::size_t cd = ct.cols();
    m.char_table = a.GetParameter("lem/chars", {m.symbols(), cd});
    const std::size_t td = a.GetTensor("lem/tag0").shape.at(1);
    for (std::size_t c = 0; c < m.categories.size(); ++c)
      m.tag_tables.push_back(
          a.GetParameter("lem/tag" + std::to_string(c), {m.values[c].size() + 1, td}));
    m.encoder = nn::GetGru(a, "lem/encoder");
    m.decoder = nn::GetGru(a, "lem/decoder");
    const std::size_t h = m.encoder.hidden_dim();
    if (m.encoder.input_dim() != cd || m.decoder.input_dim() != 2 * cd || m.decoder.hidden_dim() != h)
      throw LemmatizerError(LemmatizerErrc::kBadModel, "recurrent size mismatch");
    m.init_w = a.GetParameter("lem/init_w", {h, m.categories.size() * td});
    m.init_b = a.GetParameter("lem/init_b", {h});
    m.out_w = a.GetParameter("lem/out_w", {2 * h + cd, m.symbols()});
    m.out_b = a.GetParameter("lem/out_b", {m.symbols()});
    return m;
  } catch (const nn::NumericsError &e) {
    throw LemmatizerError(LemmatizerErrc::kBadModel, e.what());
  } catch (const std::logic_error &e) {
    throw LemmatizerError(LemmatizerErrc::kBadModel, std::string("bad lemmatizer: ") + e.what());
  }
}

LemmatizerModel LemmatizerModel::Load(const std::string &path) {
  return FromArchive(nn::ModelArchive::Load(path));
}

LemmatizerModel MakeLemmatizer(const std::vector<LemmaTriple> &triples,
                               const LemmatizerDims &dims, Rng &rng) {
  if (triples.empty())
    throw LemmatizerError(LemmatizerErrc::kEmptyTrainingSet, "no training triples");
  std::set<char32_t> chars;
  std::set<std::string> upos;
  std::map<std::string, std::set<std::string>> feats;
  for (const auto &t : triples) {
    for (char32_t c : utf8::Decode(t.key.form)) chars.insert(c);
    for (char32_t c : utf8::Decode(t.lemma)) chars.insert(c);
    if (!t.key.upos.empty()) upos.insert(t.key.upos);
    for (const auto &[k, v] : ParseFeatures(t.key.feats)) feats[k].insert(v);
  }
  LemmatizerModel m;
  m.chars.assign(chars.begin(), chars.end());
  m.Index();
  m.categories.push_back("UPOS");
  m.values.emplace_back(upos.begin(), upos.end());
  for (const auto &[k, vs] : feats) {
    m.categories.push_back(k);
    m.values.emplace_back(vs.begin(), vs.end());
  }
  const std::size_t h = dims.hidden;
  m.char_table = Parameter(XavierUniform({m.symbols(), dims.char_dim}, rng));
  for (const auto &vals : m.values)
    m.tag_tables.push_back(Parameter(XavierUniform({vals.size() + 1, dims.tag_dim}, rng)));
  m.init_w = Parameter(XavierUniform({h, m.categories.size() * dims.tag_dim}, rng));
  m.init_b = Parameter(Tensor({h}));
  m.encoder = nn::MakeGru(dims.char_dim, h, rng);
  m.decoder = nn::MakeGru(2 * dims.char_dim, h, rng);
  m.out_w = Parameter(XavierUniform({2 * h + dims.char_dim, m.symbols()}, rng));
  m.out_b = Parameter(Tensor({m.symbols()}));
  return m;
}

std::size_t MaxLemmaLength(const std::string &form) {
  return 2 * utf8::Decode(form).size() + 8;
}

std::string DecodeLemma(const LemmatizerModel &model, const LemmaKey &key) {
  nn::NoGradScope no_grad;
  const Encoded enc = Encode(model, key);
  const std::u32string form = utf8::Decode(key.form);
  const std::size_t limit = MaxLemmaLength(key.form);
  std::u32string out;
  Var h = enc.final;
  std::size_t prev = LemmatizerModel::kBos;
  for (std::size_t j = 0; j < limit; ++j) {
    auto [next, logits] = Step(model, enc, h, prev, j);
    h = next;
    const auto &v = logits.values();
    // Never emit BOS.
    std::size_t best = LemmatizerModel::kEos;
    for (std::size_t s = LemmatizerModel::kEos; s < v.size(); ++s) {
      if (v[s] > v[best]) best = s;
    }
    if (best == LemmatizerModel::kEos) break;
    if (best == LemmatizerModel::kUnk) {
      if (j < form.size()) out.push_back(form[j]);
    } else {
      out.push_back(model.chars[best - LemmatizerModel::kUnk - 1]);
    }
    prev = best;
  }
  return utf8::Encode(out);
}

std::string Lemmatize(const LemmatizerModel &model, const LemmaKey &key) {
  if (!model.cache_enabled || !model.cache) return DecodeLemma(model, key);
  const std::string k = key.Serialize();
  std::string lemma;
  if (model.cache->Find(k, &lemma)) return lemma;
  lemma = DecodeLemma(model, key);
  model.cache->Insert(k, lemma);
  return lemma;
}

void LemmatizeDocument(const LemmatizerModel &model, ConlluDocument &doc) {
  for (auto &s : doc.sentences) {
    for (auto *w : s.MutableWords()) {
      w->lemma = Lemmatize(model, LemmaKey::Of(w->form, w->upos, w->feats));
      if (w->lemma.empty()) w->lemma = w->form;
    }
  }
}

Var LemmaLoss(const LemmatizerModel &model, const LemmaTriple &triple) {
  const Encoded enc = Encode(model, triple.key);
  const std::vector<std::size_t> targets = LemmaTargets(model, triple.lemma);
  std::vector<Var> terms;
  Var h = enc.final;
  std::size_t prev = LemmatizerModel::kBos;
  for (std::size_t j = 0; j < targets.size(); ++j) {
    auto [next, logits] = Step(model, enc, h, prev, j);
    h = next;
    terms.push_back(nn::SoftmaxNll(logits, targets[j]));
    prev = targets[j];
  }
  return nn::AddScalars(terms);
}

LemmatizerModel TrainLemmatizer(const std::vector<LemmaTriple> &triples, const Hyper &hyper,
                                std::uint64_t seed, TrainingLog *log) {
  LemmatizerDims dims;
  dims.char_dim = hyper.Size("char_dim", 24);
  dims.tag_dim = hyper.Size("tag_dim", 8);
  dims.hidden = hyper.Size("hidden", 64);
  const std::size_t epochs = hyper.Size("epochs", 20);
  const double lr = hyper.Real("lr", 0.003);
  const double clip = hyper.Real("clip", 5.0);
  hyper.CheckAllUsed();

  Rng rng(seed);
  LemmatizerModel model = MakeLemmatizer(triples, dims, rng);
  const std::vector<Var> params = model.Parameters();
  nn::ZeroGrads(params);
  nn::Adam adam({.learning_rate = lr, .clip_norm = clip});
  std::vector<std::size_t> order(triples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    rng.Shuffle(order);
    double total = 0.0;
    for (std::size_t i : order) {
      const Var loss = LemmaLoss(model, triples[i]);
      total += loss.scalar();
      loss.Backward();
      adam.Step(params);
    }
    if (log) log->push_back({epoch, total / triples.size()});
    LogMessage(LogLevel::kDebug, "lemmatizer epoch " + std::to_string(epoch) + " loss " +
                                     std::to_string(total / triples.size()));
  }
  std::vector<Var> owned = params;
  for (auto &p : owned) p.tensor().grad.clear();
  model.cache->Clear();
  return model;
}

}  // namespace deplima
