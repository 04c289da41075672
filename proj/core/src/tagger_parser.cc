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

#include "deplima/tagger_parser.h"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "deplima/log.h"
#include "deplima/mst.h"
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

std::string JoinLines(const std::vector<std::string> &lines) {
  std::string out;
  for (const auto &l : lines) out += utf8::EscapeField(l) + '\n';
  return out;
}

std::vector<std::string> SplitLines(const std::string &text) {
  std::vector<std::string> out;
  for (const auto &l : utf8::Split(text, '\n')) {
    if (!l.empty()) out.push_back(utf8::UnescapeField(l));
  }
  return out;
}

std::size_t DeprelIndex(const TaggerInventory &inv, const std::string &deprel) {
  auto it = std::lower_bound(inv.deprels.begin(), inv.deprels.end(), deprel);
  return it != inv.deprels.end() && *it == deprel ? it - inv.deprels.begin() : inv.deprels.size();
}

std::vector<std::string> FormsOf(const ConlluSentence &s) {
  std::vector<std::string> forms;
  for (const auto *w : s.Words()) forms.push_back(w->form);
  return forms;
}

double DevLas(const TaggerParserModel &model, const ConlluDocument &dev) {
  std::size_t right = 0, total = 0;
  for (const auto &s : dev.sentences) {
    const auto words = s.Words();
    if (words.empty()) continue;
    const SentenceAnalysis a = AnalyzeSentence(model, FormsOf(s));
    for (std::size_t i = 0; i < words.size(); ++i) {
      right += words[i]->head && *words[i]->head == a.heads[i] && words[i]->deprel == a.deprels[i];
    }
    total += words.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(right) / total;
}

}  // namespace

std::size_t TagCategory::Index(const std::string &label) const {
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == label) return i;
  }
  return 0;
}

TaggerInventory BuildTaggerInventory(const ConlluDocument &treebank, double rare_threshold) {
  std::set<std::string> upos, deprels{kRootDeprel};
  std::map<std::string, std::pair<std::size_t, std::set<std::string>>> feats;
  std::size_t total = 0;
  for (std::size_t si = 0; si < treebank.sentences.size(); ++si) {
    for (const auto *w : treebank.sentences[si].Words()) {
      if (w->upos.empty() || !w->head || w->deprel.empty())
        throw TaggerError(TaggerErrc::kMissingGoldAnnotations,
                          "sentence " + std::to_string(si + 1) + " word " +
                              std::to_string(w->first) + " lacks UPOS, HEAD or DEPREL");
      ++total;
      upos.insert(w->upos);
      deprels.insert(w->deprel);
      for (const auto &[k, v] : w->feats) {
        ++feats[k].first;
        feats[k].second.insert(v);
      }
    }
  }
  if (total == 0) throw TaggerError(TaggerErrc::kEmptyTrainingSet, "treebank has no words");

  TaggerInventory inv;
  TagCategory pos{kUposCategory, {""}};
  pos.labels.insert(pos.labels.end(), upos.begin(), upos.end());
  inv.categories.push_back(std::move(pos));
  for (const auto &[key, entry] : feats) {
    if (static_cast<double>(entry.first) < rare_threshold * static_cast<double>(total)) {
      LogMessage(LogLevel::kDebug, "dropping rare feature " + key);
      continue;
    }
    TagCategory c{key, {""}};
    c.labels.insert(c.labels.end(), entry.second.begin(), entry.second.end());
    inv.categories.push_back(std::move(c));
  }
  inv.deprels.assign(deprels.begin(), deprels.end());
  return inv;
}

std::vector<Var> TaggerParserModel::Parameters() const {
  std::vector<Var> out = words.Parameters();
  for (const auto &p : rnn1.Parameters()) out.push_back(p);
  for (const auto &h : heads) {
    out.push_back(h.projection);
    out.push_back(h.crf.transitions);
  }
  for (const auto &p : rnn2.Parameters()) out.push_back(p);
  for (const Var &v : {root, arc_head_w, arc_head_b, arc_dep_w, arc_dep_b, arc_w, arc_bias,
                       label_head_w, label_head_b, label_dep_w, label_dep_b, label_w, label_b})
    out.push_back(v);
  return out;
}

std::size_t TaggerParserModel::posterior_dim() const {
  std::size_t d = 0;
  for (const auto &c : inventory.categories) d += c.labels.size();
  return d;
}

void TaggerParserModel::AttachEmbeddings(std::shared_ptr<const WordVectors> vectors) {
  try {
    words.AttachEmbeddings(std::move(vectors));
  } catch (const TaggerError &) {
    throw;
  } catch (const Error &e) {
    throw TaggerError(TaggerErrc::kBadModel, e.what());
  }
}

nn::ModelArchive TaggerParserModel::ToArchive() const {
  nn::ModelArchive a;
  words.Put(a, "tp/words");
  std::string cats;
  for (const auto &c : inventory.categories) {
    cats += utf8::EscapeField(c.name);
    for (std::size_t i = 1; i < c.labels.size(); ++i) cats += '\t' + utf8::EscapeField(c.labels[i]);
    cats += '\n';
  }
  a.PutText("tp/categories", cats);
  a.PutText("tp/deprels", JoinLines(inventory.deprels));
  nn::PutBiRnn(a, "tp/rnn1", rnn1);
  for (std::size_t i = 0; i < heads.size(); ++i) {
    a.PutVar("tp/cat" + std::to_string(i) + "/proj", heads[i].projection);
    a.PutVar("tp/cat" + std::to_string(i) + "/crf", heads[i].crf.transitions);
  }
  nn::PutBiRnn(a, "tp/rnn2", rnn2);
  const std::pair<const char *, const Var *> named[] = {
      {"tp/root", &root},
      {"tp/arc/head_w", &arc_head_w},
      {"tp/arc/head_b", &arc_head_b},
      {"tp/arc/dep_w", &arc_dep_w},
      {"tp/arc/dep_b", &arc_dep_b},
      {"tp/arc/w", &arc_w},
      {"tp/arc/bias", &arc_bias},
      {"tp/label/head_w", &label_head_w},
      {"tp/label/head_b", &label_head_b},
      {"tp/label/dep_w", &label_dep_w},
      {"tp/label/dep_b", &label_dep_b},
      {"tp/label/w", &label_w},
      {"tp/label/b", &label_b},
  };
  for (const auto &[name, v] : named) a.PutVar(name, *v);
  return a;
}

TaggerParserModel TaggerParserModel::FromArchive(const nn::ModelArchive &a) {
  try {
    TaggerParserModel m;
    for (const auto &line : utf8::Split(a.GetText("tp/categories"), '\n')) {
      if (line.empty()) continue;
      const auto cols = utf8::Split(line, '\t');
      TagCategory c{utf8::UnescapeField(cols[0]), {""}};
      for (std::size_t i = 1; i < cols.size(); ++i) c.labels.push_back(utf8::UnescapeField(cols[i]));
      m.inventory.categories.push_back(std::move(c));
    }
    m.inventory.deprels = SplitLines(a.GetText("tp/deprels"));
    if (m.inventory.categories.empty() || m.inventory.categories[0].name != kUposCategory ||
        m.inventory.deprels.empty())
      throw TaggerError(TaggerErrc::kBadModel, "bad tagger inventories");
    m.words = WordEncoder::Get(a, "tp/words");
    m.rnn1 = nn::GetBiRnn(a, "tp/rnn1");
    if (m.rnn1.input_dim() != m.words.output_dim())
      throw TaggerError(TaggerErrc::kBadModel, "word representation size mismatch");
    const std::size_t s1 = m.rnn1.output_dim();
    for (std::size_t i = 0; i < m.inventory.categories.size(); ++i) {
      const std::size_t l = m.inventory.categories[i].labels.size();
      const std::string p = "tp/cat" + std::to_string(i);
      m.heads.push_back({a.GetParameter(p + "/proj", {s1, l}),
                         {a.GetParameter(p + "/crf", {l, l})}});
    }
    m.rnn2 = nn::GetBiRnn(a, "tp/rnn2");
    if (m.rnn2.input_dim() != s1 + m.posterior_dim())
      throw TaggerError(TaggerErrc::kBadModel, "second BiRNN input size mismatch");
    const std::size_t s2 = m.rnn2.output_dim();
    const std::size_t arc = a.GetTensor("tp/arc/w").shape.at(0);
    const std::size_t lab = a.GetTensor("tp/label/head_b").shape.at(0);
    const std::size_t r = m.inventory.deprels.size();
    m.root = a.GetParameter("tp/root", {s2});
    m.arc_head_w = a.GetParameter("tp/arc/head_w", {s2, arc});
    m.arc_head_b = a.GetParameter("tp/arc/head_b", {arc});
    m.arc_dep_w = a.GetParameter("tp/arc/dep_w", {s2, arc});
    m.arc_dep_b = a.GetParameter("tp/arc/dep_b", {arc});
    m.arc_w = a.GetParameter("tp/arc/w", {arc, arc});
    m.arc_bias = a.GetParameter("tp/arc/bias", {arc});
    m.label_head_w = a.GetParameter("tp/label/head_w", {s2, lab});
    m.label_head_b = a.GetParameter("tp/label/head_b", {lab});
    m.label_dep_w = a.GetParameter("tp/label/dep_w", {s2, lab});
    m.label_dep_b = a.GetParameter("tp/label/dep_b", {lab});
    m.label_w = a.GetParameter("tp/label/w", {3 * lab, r});
    m.label_b = a.GetParameter("tp/label/b", {r});
    return m;
  } catch (const nn::NumericsError &e) {
    throw TaggerError(TaggerErrc::kBadModel, e.what());
  } catch (const std::logic_error &e) {
    throw TaggerError(TaggerErrc::kBadModel, std::string("bad tagger model: ") + e.what());
  }
}

TaggerParserModel TaggerParserModel::Load(const std::string &path) {
  return FromArchive(nn::ModelArchive::Load(path));
}

TaggerParserModel MakeTaggerParser(TaggerInventory inventory, WordEncoder words,
                                   const TaggerParserDims &dims, Rng &rng) {
  TaggerParserModel m;
  m.inventory = std::move(inventory);
  m.words = std::move(words);

  auto param = [&](nn::Shape shape) { return Parameter(XavierUniform(shape, rng)); };
  auto zeros = [](nn::Shape shape) { return Parameter(Tensor(std::move(shape))); };
  m.rnn1 = nn::MakeBiRnn(m.words.output_dim(), dims.hidden1, rng);
  for (const auto &c : m.inventory.categories) {
    m.heads.push_back({param({m.rnn1.output_dim(), c.labels.size()}),
                       nn::MakeCrf(c.labels.size(), rng)});
  }
  m.rnn2 = nn::MakeBiRnn(m.rnn1.output_dim() + m.posterior_dim(), dims.hidden2, rng);
  const std::size_t s2 = m.rnn2.output_dim();
  const std::size_t r = m.inventory.deprels.size();
  m.root = param({s2});
  m.arc_head_w = param({s2, dims.arc});
  m.arc_head_b = zeros({dims.arc});
  m.arc_dep_w = param({s2, dims.arc});
  m.arc_dep_b = zeros({dims.arc});
  m.arc_w = param({dims.arc, dims.arc});
  m.arc_bias = zeros({dims.arc});
  m.label_head_w = param({s2, dims.label});
  m.label_head_b = zeros({dims.label});
  m.label_dep_w = param({s2, dims.label});
  m.label_dep_b = zeros({dims.label});
  m.label_w = param({3 * dims.label, r});
  m.label_b = zeros({r});
  return m;
}

std::vector<Var> EncodeSentence(const TaggerParserModel &model,
                                const std::vector<std::string> &forms,
                                const std::vector<bool> *use_trainable) {
  if (forms.empty()) throw TaggerError(TaggerErrc::kEmptySentence, "no words to encode");
  std::vector<Var> inputs;
  inputs.reserve(forms.size());
  for (std::size_t i = 0; i < forms.size(); ++i) {
    inputs.push_back(model.words.Input(forms[i], !use_trainable || (*use_trainable)[i]));
  }
  return nn::BiRnnForward(model.rnn1, inputs);
}

MorphOutput TagMorphology(const TaggerParserModel &model, const std::vector<Var> &states,
                          bool decode) {
  MorphOutput out;
  const Var s = nn::Stack(states);
  for (const auto &h : model.heads) {
    Var em = nn::MatMul(s, h.projection);
    out.posteriors.push_back(nn::CrfMarginals(em, h.crf.transitions));
    if (decode) out.labels.push_back(nn::ViterbiDecode(em.tensor(), h.crf.transitions.tensor()));
    out.emissions.push_back(std::move(em));
  }
  return out;
}

std::vector<Var> ParserStates(const TaggerParserModel &model, const std::vector<Var> &states,
                              const std::vector<Var> &posteriors) {
  std::vector<Var> cols{nn::Stack(states)};
  cols.insert(cols.end(), posteriors.begin(), posteriors.end());
  const std::vector<Var> inputs = nn::Unstack(nn::ConcatColumns(cols));
  return nn::BiRnnForward(model.rnn2, inputs);
}

namespace {

Var WithRoot(const TaggerParserModel &model, const std::vector<Var> &parser_states) {
  std::vector<Var> rows{model.root};
  rows.insert(rows.end(), parser_states.begin(), parser_states.end());
  return nn::Stack(rows);
}

}  // namespace

Var ArcScores(const TaggerParserModel &model, const std::vector<Var> &parser_states) {
  const Var x = nn::Stack(parser_states);
  const Var h = nn::Tanh(nn::ProjectRows(WithRoot(model, parser_states), model.arc_head_w,
                                         model.arc_head_b));
  const Var d = nn::Tanh(nn::ProjectRows(x, model.arc_dep_w, model.arc_dep_b));
  const Var s = nn::MatMulNT(nn::MatMul(h, model.arc_w), d);
  return nn::AddRowVector(s, nn::MatVec(d, model.arc_bias));
}

Var LabelScores(const TaggerParserModel &model, const std::vector<Var> &parser_states,
                const std::vector<int> &heads, const std::vector<int> &dependents) {
  const Var lh = nn::Tanh(nn::ProjectRows(WithRoot(model, parser_states), model.label_head_w,
                                          model.label_head_b));
  const Var ld = nn::Tanh(
      nn::ProjectRows(nn::Stack(parser_states), model.label_dep_w, model.label_dep_b));
  std::vector<std::size_t> hi(heads.begin(), heads.end()), di;
  for (int d : dependents) di.push_back(static_cast<std::size_t>(d - 1));
  const Var gh = nn::GatherRows(lh, hi);
  const Var gd = nn::GatherRows(ld, di);
  const Var cols[] = {gh, gd, nn::Mul(gh, gd)};
  return nn::ProjectRows(nn::ConcatColumns(cols), model.label_w, model.label_b);
}

ParseOutput ParseDependencies(const TaggerParserModel &model, const std::vector<Var> &states,
                              const std::vector<Var> &posteriors) {
  if (states.empty()) throw TaggerError(TaggerErrc::kEmptySentence, "no words to parse");
  const std::vector<Var> ps = ParserStates(model, states, posteriors);
  ParseOutput out;
  out.heads = DecodeSingleRootTree(ArcScores(model, ps).tensor());
  std::vector<int> deps;
  for (std::size_t d = 1; d <= states.size(); ++d) deps.push_back(static_cast<int>(d));
  const Tensor labels = LabelScores(model, ps, out.heads, deps).tensor();
  const auto &rels = model.inventory.deprels;
  const std::size_t root = DeprelIndex(model.inventory, kRootDeprel);
  for (std::size_t d = 0; d < states.size(); ++d) {
    if (out.heads[d] == 0) {
      out.deprels.push_back(kRootDeprel);
      continue;
    }
    std::size_t best = rels.size();
    for (std::size_t r = 0; r < rels.size(); ++r) {
      if (r == root && rels.size() > 1) continue;
      if (best == rels.size() || labels.at(d, r) > labels.at(d, best)) best = r;
    }
    out.deprels.push_back(rels[best]);
  }
  return out;
}

SentenceAnalysis AnalyzeSentence(const TaggerParserModel &model,
                                 const std::vector<std::string> &forms) {
  nn::NoGradScope no_grad;
  const std::vector<Var> states = EncodeSentence(model, forms);
  const MorphOutput morph = TagMorphology(model, states);
  ParseOutput parse = ParseDependencies(model, states, morph.posteriors);
  SentenceAnalysis out;
  out.feats.resize(forms.size());
  const auto &cats = model.inventory.categories;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    out.upos.push_back(cats[0].labels[morph.labels[0][i]]);
    for (std::size_t c = 1; c < cats.size(); ++c) {
      const std::size_t l = morph.labels[c][i];
      if (l != 0) out.feats[i][cats[c].name] = cats[c].labels[l];
    }
  }
  out.heads = std::move(parse.heads);
  out.deprels = std::move(parse.deprels);
  return out;
}

void AnalyzeDocument(const TaggerParserModel &model, ConlluDocument &doc) {
  for (auto &s : doc.sentences) {
    auto words = s.MutableWords();
    if (words.empty()) continue;
    SentenceAnalysis a = AnalyzeSentence(model, FormsOf(s));
    for (std::size_t i = 0; i < words.size(); ++i) {
      words[i]->upos = a.upos[i];
      words[i]->feats = a.feats[i];
      words[i]->head = a.heads[i];
      words[i]->deprel = a.deprels[i];
    }
  }
}

Var JointLoss(const TaggerParserModel &model, const ConlluSentence &sentence, Rng *rng,
              double word_drop) {
  const auto words = sentence.Words();
  const std::size_t n = words.size();
  if (n == 0) throw TaggerError(TaggerErrc::kEmptySentence, "no words in sentence");
  std::vector<bool> keep(n, true);
  if (rng && word_drop > 0.0) {
    for (std::size_t i = 0; i < n; ++i) keep[i] = rng->Uniform() >= word_drop;
  }
  const std::vector<Var> states = EncodeSentence(model, FormsOf(sentence), &keep);
  const MorphOutput morph = TagMorphology(model, states, false);

  std::vector<Var> terms;
  const auto &cats = model.inventory.categories;
  for (std::size_t c = 0; c < cats.size(); ++c) {
    std::vector<std::size_t> gold(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (c == 0) {
        gold[i] = cats[c].Index(words[i]->upos);
      } else {
        auto it = words[i]->feats.find(cats[c].name);
        gold[i] = it == words[i]->feats.end() ? 0 : cats[c].Index(it->second);
      }
    }
    terms.push_back(nn::CrfNll(morph.emissions[c], model.heads[c].crf.transitions, gold));
  }

  const std::vector<Var> ps = ParserStates(model, states, morph.posteriors);
  std::vector<std::size_t> heads(n), excluded(n);
  std::vector<int> head_list, dep_list;
  std::vector<std::size_t> rel_gold;
  for (std::size_t i = 0; i < n; ++i) {
    if (!words[i]->head || *words[i]->head < 0 || static_cast<std::size_t>(*words[i]->head) > n)
      throw TaggerError(TaggerErrc::kMissingGoldAnnotations,
                        "word " + std::to_string(i + 1) + " has no usable head");
    heads[i] = static_cast<std::size_t>(*words[i]->head);
    excluded[i] = i + 1;
    const std::size_t r = DeprelIndex(model.inventory, words[i]->deprel);
    if (r < model.inventory.deprels.size()) {
      head_list.push_back(static_cast<int>(heads[i]));
      dep_list.push_back(static_cast<int>(i + 1));
      rel_gold.push_back(r);
    }
  }
  terms.push_back(nn::MaskedColumnNll(ArcScores(model, ps), heads, excluded));
  if (!rel_gold.empty()) {
    const std::vector<Var> rows = nn::Unstack(LabelScores(model, ps, head_list, dep_list));
    for (std::size_t k = 0; k < rows.size(); ++k) terms.push_back(nn::SoftmaxNll(rows[k], rel_gold[k]));
  }
  return nn::AddScalars(terms);
}

TaggerParserModel TrainJoint(const ConlluDocument &treebank,
                             std::shared_ptr<const WordVectors> embeddings, const Hyper &hyper,
                             std::uint64_t seed, const ConlluDocument *dev, TrainingLog *log) {
  TaggerParserDims dims;
  dims.hidden1 = hyper.Size("hidden1", 64);
  dims.hidden2 = hyper.Size("hidden2", 64);
  dims.arc = hyper.Size("arc", 64);
  dims.label = hyper.Size("label", 32);
  WordEncoderDims wdims;
  wdims.char_dim = hyper.Size("char_dim", 16);
  wdims.char_hidden = hyper.Size("char_hidden", 32);
  wdims.word_dim = hyper.Size("word_dim", 32);
  const std::size_t epochs = hyper.Size("epochs", 20);
  const double lr = hyper.Real("lr", 0.002);
  const double clip = hyper.Real("clip", 5.0);
  const std::size_t min_count = hyper.Size("min_count", 3);
  const double rare = hyper.Real("rare_threshold", 1e-3);
  const double word_drop = hyper.Real("word_drop", 0.1);
  hyper.CheckAllUsed();

  TaggerInventory inventory = BuildTaggerInventory(treebank, rare);
  std::vector<std::string> forms;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < treebank.sentences.size(); ++i) {
    const auto f = FormsOf(treebank.sentences[i]);
    if (!f.empty()) order.push_back(i);
    forms.insert(forms.end(), f.begin(), f.end());
  }
  std::vector<std::string> frequent;
  std::vector<char32_t> chars;
  CollectWordInventory(forms, min_count, &frequent, &chars);
  Rng rng(seed);
  WordEncoder words =
      MakeWordEncoder(std::move(frequent), std::move(chars), wdims, std::move(embeddings), rng);
  TaggerParserModel model = MakeTaggerParser(std::move(inventory), std::move(words), dims, rng);
  const std::vector<Var> params = model.Parameters();
  nn::ZeroGrads(params);
  nn::Adam adam({.learning_rate = lr, .clip_norm = clip});

  std::vector<std::vector<double>> best;
  double best_metric = -1.0;
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    rng.Shuffle(order);
    double total = 0.0;
    for (std::size_t i : order) {
      const Var loss = JointLoss(model, treebank.sentences[i], &rng, word_drop);
      total += loss.scalar();
      loss.Backward();
      adam.Step(params);
    }
    EpochRecord rec{epoch, total / order.size()};
    if (dev) {
      rec.dev_metric = DevLas(model, *dev);
      if (rec.dev_metric > best_metric) {
        best_metric = rec.dev_metric;
        best.clear();
        for (const auto &p : params) best.push_back(p.values());
      }
    }
    LogMessage(LogLevel::kDebug, "tagger-parser epoch " + std::to_string(epoch) + " loss " +
                                     std::to_string(rec.loss));
    if (log) log->push_back(rec);
  }
  std::vector<Var> owned = params;
  for (std::size_t i = 0; i < best.size(); ++i) owned[i].tensor().values = best[i];
  for (auto &p : owned) p.tensor().grad.clear();
  return model;
}

}  // namespace deplima
