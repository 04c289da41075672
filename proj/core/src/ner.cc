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

#include "deplima/ner.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include "deplima/log.h"
#include "deplima/optimizer.h"
#include "deplima/rng.h"
#include "deplima/utf8.h"

namespace deplima {

using nn::Var;

namespace {

constexpr std::string_view kTypeNames[] = {"Number", "DateTime", "Organization", "Location",
                                           "Person", "Event",    "Product",      "Miscellaneous"};

std::string Lower(std::string_view s) {
  std::u32string cps = utf8::Decode(s);
  for (auto &c : cps) c = utf8::ToLower(c);
  return utf8::Encode(cps);
}

std::vector<std::string> Words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(std::move(w));
  return out;
}

// Splits "B-Type" into its prefix and type; nullopt for O and junk.
std::optional<std::pair<char, EntityType>> ParseTag(std::string_view tag) {
  if (tag.size() < 3 || tag[1] != '-' || (tag[0] != 'B' && tag[0] != 'I')) return std::nullopt;
  const auto type = ParseEntityType(tag.substr(2));
  if (!type) return std::nullopt;
  return std::pair{tag[0], *type};
}

}  // namespace

std::string_view EntityTypeName(EntityType type) {
  return kTypeNames[static_cast<std::size_t>(type)];
}

std::optional<EntityType> ParseEntityType(std::string_view name) {
  static const std::pair<std::string_view, EntityType> kAliases[] = {
      {"date", EntityType::kDateTime},     {"num", EntityType::kNumber},
      {"org", EntityType::kOrganization},  {"loc", EntityType::kLocation},
      {"per", EntityType::kPerson},        {"misc", EntityType::kMiscellaneous},
  };
  const std::string key = Lower(name);
  for (EntityType t : kRuleEntityTypes) {
    if (Lower(EntityTypeName(t)) == key) return t;
  }
  for (const auto &[alias, t] : kAliases) {
    if (alias == key) return t;
  }
  return std::nullopt;
}

BioSequence BioEncode(std::span<const EntitySpan> spans, std::size_t n) {
  BioSequence tags(n, "O");
  std::vector<bool> used(n, false);
  for (const auto &s : spans) {
    if (s.start >= s.end || s.end > n)
      throw NerError(NerErrc::kOutOfRange, "span [" + std::to_string(s.start) + ", " +
                                               std::to_string(s.end) + ") outside " +
                                               std::to_string(n) + " tokens");
    for (std::size_t i = s.start; i < s.end; ++i) {
      if (used[i])
        throw NerError(NerErrc::kOverlappingSpans, "token " + std::to_string(i) + " in two spans");
      used[i] = true;
      tags[i] = (i == s.start ? "B-" : "I-") + std::string(EntityTypeName(s.type));
    }
  }
  return tags;
}

std::vector<EntitySpan> BioDecode(const BioSequence &tags) {
  std::vector<EntitySpan> out;
  std::optional<EntitySpan> open;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto tag = ParseTag(tags[i]);
    const bool continues = tag && tag->first == 'I' && open && open->type == tag->second;
    if (continues) {
      open->end = i + 1;
      continue;
    }
    if (open) out.push_back(*open);
    open.reset();
    if (tag) open = EntitySpan{tag->second, i, i + 1};
  }
  if (open) out.push_back(*open);
  return out;
}

// ---- Rules ----------------------------------------------------------------

void Gazetteer::Add(std::string_view term) {
  std::vector<std::string> words = Words(term);
  if (words.empty()) return;
  max_length = std::max(max_length, words.size());
  entries.insert(std::move(words));
}

namespace {

PatternElement ParseElement(std::string_view text) {
  PatternElement e;
  if (text.empty()) throw NerError(NerErrc::kBadRule, "empty pattern element");
  if (text[0] == '\\') {
    e.text = std::string(text.substr(1));
    if (e.text.empty()) throw NerError(NerErrc::kBadRule, "empty quoted literal");
    return e;
  }
  if (text.size() > 1 && text.back() == '+') {
    e.repeat = true;
    text.remove_suffix(1);
  }
  if (text.size() >= 2 && text.front() == '/' && text.back() == '/') {
    e.kind = PatternElement::Kind::kRegex;
    e.text = std::string(text.substr(1, text.size() - 2));
    try {
      e.regex = std::make_shared<const std::regex>(e.text, std::regex::ECMAScript);
    } catch (const std::regex_error &err) {
      throw NerError(NerErrc::kBadRule, "bad regex /" + e.text + "/: " + err.what());
    }
  } else if (text.size() > 1 && text[0] == '~') {
    e.kind = PatternElement::Kind::kCaseless;
    e.text = Lower(text.substr(1));
  } else if (text.size() > 1 && text[0] == '@') {
    e.kind = PatternElement::Kind::kGazetteer;
    e.text = std::string(text.substr(1));
  } else if (text.size() > 4 && text.substr(0, 4) == "pos:") {
    e.kind = PatternElement::Kind::kPos;
    e.text = std::string(text.substr(4));
  } else {
    e.text = std::string(text);
  }
  return e;
}

void CheckContext(const TokenPattern &p, const std::string &rule) {
  if (p.size() > 3)
    throw NerError(NerErrc::kBadRule, "rule " + rule + ": context longer than 3 tokens");
  for (const auto &e : p) {
    if (e.repeat)
      throw NerError(NerErrc::kBadRule, "rule " + rule + ": repeated element in context");
  }
}

NerRule ParseRuleLine(const std::vector<std::string> &w, std::size_t line) {
  const std::string where = "line " + std::to_string(line);
  if (w.size() < 4) throw NerError(NerErrc::kBadRule, where + ": incomplete rule");
  NerRule r;
  r.id = w[1];
  const auto type = ParseEntityType(w[2]);
  if (!type) throw NerError(NerErrc::kBadRule, where + ": unknown entity type " + w[2]);
  r.type = *type;
  TokenPattern *target = nullptr;
  bool has_trigger = false;
  for (std::size_t i = 3; i < w.size(); ++i) {
    std::string_view tok = w[i];
    std::string_view value = tok;
    if (tok.starts_with("prio=")) {
      try {
        std::size_t used = 0;
        r.priority = std::stoi(std::string(tok.substr(5)), &used);
        if (used != tok.size() - 5) throw std::invalid_argument("trailing");
      } catch (const std::logic_error &) {
        throw NerError(NerErrc::kBadRule, where + ": bad priority " + std::string(tok));
      }
      target = nullptr;
      continue;
    }
    if (tok.starts_with("trigger=")) {
      target = &r.trigger;
      has_trigger = true;
      value = tok.substr(8);
    } else if (tok.starts_with("left=")) {
      target = &r.left;
      value = tok.substr(5);
    } else if (tok.starts_with("right=")) {
      target = &r.right;
      value = tok.substr(6);
    } else if (!target) {
      throw NerError(NerErrc::kBadRule, where + ": unexpected " + std::string(tok));
    }
    if (!value.empty()) target->push_back(ParseElement(value));
  }
  if (!has_trigger || r.trigger.empty())
    throw NerError(NerErrc::kBadRule, where + ": rule " + r.id + " has no trigger");
  CheckContext(r.left, r.id);
  CheckContext(r.right, r.id);
  return r;
}

void CheckReferences(const RuleSet &set) {
  for (const auto &r : set.rules) {
    for (const TokenPattern *p : {&r.trigger, &r.left, &r.right}) {
      for (const auto &e : *p) {
        if (e.kind == PatternElement::Kind::kGazetteer && !set.gazetteers.contains(e.text))
          throw NerError(NerErrc::kBadRuleReference,
                         "rule " + r.id + " references unknown gazetteer @" + e.text);
      }
    }
  }
}

bool MatchesToken(const PatternElement &e, const NerToken &t) {
  switch (e.kind) {
    case PatternElement::Kind::kLiteral:
      return t.surface == e.text;
    case PatternElement::Kind::kCaseless:
      return Lower(t.surface) == e.text;
    case PatternElement::Kind::kRegex:
      return std::regex_match(t.surface, *e.regex);
    case PatternElement::Kind::kPos:
      return t.upos == e.text;
    case PatternElement::Kind::kGazetteer:
      break;
  }
  return false;
}

class Matcher {
 public:
  Matcher(const RuleSet &rules, std::span<const NerToken> tokens)
      : rules_(rules), tokens_(tokens) {}

  // Ends reachable by one occurrence of `e` from `pos`.
  void Single(const PatternElement &e, std::size_t pos, std::set<std::size_t> &ends) const {
    if (pos >= tokens_.size()) return;
    if (e.kind != PatternElement::Kind::kGazetteer) {
      if (MatchesToken(e, tokens_[pos])) ends.insert(pos + 1);
      return;
    }
    const Gazetteer &g = rules_.gazetteers.at(e.text);
    std::vector<std::string> words;
    for (std::size_t len = 1; len <= g.max_length && pos + len <= tokens_.size(); ++len) {
      words.push_back(tokens_[pos + len - 1].surface);
      if (g.entries.contains(words)) ends.insert(pos + len);
    }
  }

  std::set<std::size_t> Element(const PatternElement &e, std::size_t pos) const {
    std::set<std::size_t> ends;
    Single(e, pos, ends);
    if (!e.repeat) return ends;
    std::vector<std::size_t> frontier(ends.begin(), ends.end());
    while (!frontier.empty()) {
      const std::size_t p = frontier.back();
      frontier.pop_back();
      std::set<std::size_t> next;
      Single(e, p, next);
      for (std::size_t q : next) {
        if (ends.insert(q).second) frontier.push_back(q);
      }
    }
    return ends;
  }

  std::set<std::size_t> Pattern(const TokenPattern &p, std::size_t start) const {
    std::set<std::size_t> at{start};
    for (const auto &e : p) {
      std::set<std::size_t> next;
      for (std::size_t pos : at) next.merge(Element(e, pos));
      at = std::move(next);
      if (at.empty()) break;
    }
    return at;
  }

  // Context elements consume exactly one token each.
  bool Context(const TokenPattern &p, std::size_t from) const {
    if (from + p.size() > tokens_.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i) {
      std::set<std::size_t> ends;
      Single(p[i], from + i, ends);
      if (!ends.contains(from + i + 1)) return false;
    }
    return true;
  }

 private:
  const RuleSet &rules_;
  std::span<const NerToken> tokens_;
};

}  // namespace

TokenPattern ParsePattern(std::string_view text) {
  TokenPattern p;
  for (const auto &w : Words(text)) p.push_back(ParseElement(w));
  return p;
}

RuleSet ParseRules(std::string_view text,
                   const std::function<std::string(const std::string &)> &read_file) {
  RuleSet set;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (const auto &raw : utf8::Split(text, '\n')) {
    ++line_no;
    const std::string_view line = utf8::Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> w = Words(line);
    const std::string where = "line " + std::to_string(line_no);
    if (w[0] == "gazetteer") {
      if (w.size() != 3) throw NerError(NerErrc::kBadRule, where + ": gazetteer <name> <path>");
      std::string content;
      try {
        content = read_file(w[2]);
      } catch (const std::exception &e) {
        throw NerError(NerErrc::kBadRuleReference,
                       where + ": cannot read gazetteer " + w[2] + ": " + e.what());
      }
      Gazetteer &g = set.gazetteers[w[1]];
      for (const auto &term : utf8::Split(content, '\n')) {
        const std::string_view t = utf8::Trim(term);
        if (!t.empty() && t[0] != '#') g.Add(t);
      }
    } else if (w[0] == "term") {
      if (w.size() < 3) throw NerError(NerErrc::kBadRule, where + ": term <name> <words>");
      std::string term;
      for (std::size_t i = 2; i < w.size(); ++i) term += (i > 2 ? " " : "") + w[i];
      set.gazetteers[w[1]].Add(term);
    } else if (w[0] == "rule") {
      NerRule r = ParseRuleLine(w, line_no);
      if (!ids.insert(r.id).second)
        throw NerError(NerErrc::kBadRule, where + ": duplicate rule id " + r.id);
      set.rules.push_back(std::move(r));
    } else {
      throw NerError(NerErrc::kBadRule, where + ": unknown directive " + w[0]);
    }
  }
  CheckReferences(set);
  return set;
}

RuleSet LoadRules(const std::string &path) {
  auto slurp = [](const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::string text;
  try {
    text = slurp(path);
  } catch (const Error &e) {
    throw NerError(NerErrc::kBadRule, e.what());
  }
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  return ParseRules(text, [&](const std::string &name) {
    const std::filesystem::path p(name);
    return slurp(p.is_absolute() ? p : dir / p);
  });
}

std::vector<EntitySpan> ApplyRules(const RuleSet &rules, std::span<const NerToken> tokens) {
  struct Candidate {
    std::size_t start, end, rule;
  };
  const Matcher m(rules, tokens);
  std::vector<Candidate> found;
  for (std::size_t r = 0; r < rules.rules.size(); ++r) {
    const NerRule &rule = rules.rules[r];
    for (std::size_t start = 0; start < tokens.size(); ++start) {
      if (start < rule.left.size() || !m.Context(rule.left, start - rule.left.size())) continue;
      for (std::size_t end : m.Pattern(rule.trigger, start)) {
        if (end > start && m.Context(rule.right, end)) found.push_back({start, end, r});
      }
    }
  }
  std::sort(found.begin(), found.end(), [&](const Candidate &a, const Candidate &b) {
    const std::size_t la = a.end - a.start, lb = b.end - b.start;
    if (la != lb) return la > lb;
    const int pa = rules.rules[a.rule].priority, pb = rules.rules[b.rule].priority;
    if (pa != pb) return pa > pb;
    if (a.start != b.start) return a.start < b.start;
    return a.rule < b.rule;
  });
  std::vector<bool> taken(tokens.size(), false);
  std::vector<EntitySpan> out;
  for (const auto &c : found) {
    if (std::any_of(taken.begin() + c.start, taken.begin() + c.end, [](bool t) { return t; }))
      continue;
    std::fill(taken.begin() + c.start, taken.begin() + c.end, true);
    out.push_back({rules.rules[c.rule].type, c.start, c.end});
  }
  std::sort(out.begin(), out.end(),
            [](const EntitySpan &a, const EntitySpan &b) { return a.start < b.start; });
  return out;
}

// ---- Neural tagger --------------------------------------------------------

std::string NerLabelName(std::size_t label) {
  if (label == 0) return "O";
  const std::size_t k = (label - 1) / 2;
  return (label % 2 == 1 ? "B-" : "I-") + std::string(EntityTypeName(kNeuralEntityTypes.at(k)));
}

std::size_t NerLabelIndex(std::string_view tag) {
  const auto parsed = ParseTag(tag);
  if (!parsed) return 0;
  for (std::size_t k = 0; k < kNeuralEntityTypes.size(); ++k) {
    if (kNeuralEntityTypes[k] == parsed->second) return 1 + 2 * k + (parsed->first == 'I');
  }
  return 0;
}

std::vector<Var> NerModel::Parameters() const {
  std::vector<Var> p = words.Parameters();
  for (const Var &v : rnn.Parameters()) p.push_back(v);
  p.push_back(projection);
  p.push_back(crf.transitions);
  return p;
}

void NerModel::AttachEmbeddings(std::shared_ptr<const WordVectors> vectors) {
  try {
    words.AttachEmbeddings(std::move(vectors));
  } catch (const Error &e) {
    throw NerError(NerErrc::kBadModel, e.what());
  }
}

nn::ModelArchive NerModel::ToArchive() const {
  nn::ModelArchive a;
  words.Put(a, "ner/words");
  nn::PutBiRnn(a, "ner/rnn", rnn);
  a.PutVar("ner/proj", projection);
  a.PutVar("ner/crf", crf.transitions);
  return a;
}

NerModel NerModel::FromArchive(const nn::ModelArchive &archive) {
  try {
    NerModel m;
    m.words = WordEncoder::Get(archive, "ner/words");
    m.rnn = nn::GetBiRnn(archive, "ner/rnn");
    if (m.rnn.input_dim() != m.words.output_dim())
      throw NerError(NerErrc::kBadModel, "word representation size mismatch");
    m.projection = archive.GetParameter("ner/proj", {m.rnn.output_dim(), kNerLabelCount});
    m.crf.transitions = archive.GetParameter("ner/crf", {kNerLabelCount, kNerLabelCount});
    return m;
  } catch (const NerError &) {
    throw;
  } catch (const Error &e) {
    throw NerError(NerErrc::kBadModel, e.what());
  } catch (const std::logic_error &e) {
    throw NerError(NerErrc::kBadModel, std::string("bad NER model: ") + e.what());
  }
}

NerModel NerModel::Load(const std::string &path) {
  return FromArchive(nn::ModelArchive::Load(path));
}

NerModel MakeNerModel(WordEncoder words, std::size_t hidden, Rng &rng) {
  NerModel m;
  m.words = std::move(words);
  m.rnn = nn::MakeBiRnn(m.words.output_dim(), hidden, rng);
  m.projection = nn::Parameter(nn::XavierUniform({m.rnn.output_dim(), kNerLabelCount}, rng));
  m.crf = nn::MakeCrf(kNerLabelCount, rng);
  return m;
}

Var NerEmissions(const NerModel &model, const std::vector<std::string> &forms,
                 const std::vector<bool> *use_trainable) {
  if (forms.empty()) throw NerError(NerErrc::kEmptySentence, "no tokens to tag");
  std::vector<Var> inputs;
  inputs.reserve(forms.size());
  for (std::size_t i = 0; i < forms.size(); ++i) {
    inputs.push_back(model.words.Input(forms[i], !use_trainable || (*use_trainable)[i]));
  }
  return nn::ProjectRows(nn::Stack(nn::BiRnnForward(model.rnn, inputs)), model.projection);
}

Var NerLoss(const NerModel &model, const std::vector<std::string> &forms,
            std::span<const std::size_t> labels, const std::vector<bool> *use_trainable) {
  return nn::CrfNll(NerEmissions(model, forms, use_trainable), model.crf.transitions, labels);
}

BioSequence NeuralNerTags(const NerModel &model, const std::vector<std::string> &forms) {
  nn::NoGradScope no_grad;
  const Var em = NerEmissions(model, forms);
  BioSequence tags;
  for (std::size_t l : nn::ViterbiDecode(em.tensor(), model.crf.transitions.tensor()))
    tags.push_back(NerLabelName(l));
  return tags;
}

std::vector<EntitySpan> NeuralNer(const NerModel &model, const std::vector<std::string> &forms) {
  return BioDecode(NeuralNerTags(model, forms));
}

std::vector<NerSentence> ParseBioCorpus(std::string_view text) {
  std::vector<NerSentence> out;
  NerSentence current;
  auto flush = [&] {
    if (!current.tokens.empty()) out.push_back(std::move(current));
    current = {};
  };
  std::size_t line_no = 0;
  for (const auto &raw : utf8::Split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (utf8::Trim(line).empty()) {
      flush();
      continue;
    }
    if (line.starts_with("-DOCSTART-")) continue;
    const std::vector<std::string> fields = utf8::Split(line, '\t');
    if (fields.size() != 2 || fields[0].empty())
      throw NerError(NerErrc::kBadCorpus,
                     "line " + std::to_string(line_no) + ": expected token TAB tag");
    if (fields[1] != "O" && !ParseTag(fields[1]))
      throw NerError(NerErrc::kBadCorpus,
                     "line " + std::to_string(line_no) + ": bad tag " + fields[1]);
    current.tokens.push_back(fields[0]);
    current.tags.push_back(fields[1]);
  }
  flush();
  return out;
}

std::string WriteBioCorpus(const std::vector<NerSentence> &corpus) {
  std::string out;
  for (const auto &s : corpus) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out += s.tokens[i] + '\t' + (i < s.tags.size() ? s.tags[i] : "O") + '\n';
    }
    out += '\n';
  }
  return out;
}

std::vector<NerSentence> NerCorpusFromConllu(const ConlluDocument &doc) {
  std::vector<NerSentence> out;
  for (const auto &s : doc.sentences) {
    NerSentence ns;
    for (const auto *w : s.Words()) {
      std::string tag = "O";
      for (const auto &item : utf8::Split(w->misc, '|')) {
        if (item.starts_with("NE=")) tag = item.substr(3);
      }
      ns.tokens.push_back(w->form);
      ns.tags.push_back(std::move(tag));
    }
    if (!ns.tokens.empty()) out.push_back(std::move(ns));
  }
  return out;
}

NerModel TrainNer(const std::vector<NerSentence> &corpus,
                  std::shared_ptr<const WordVectors> embeddings, const Hyper &hyper,
                  std::uint64_t seed, TrainingLog *log) {
  const std::size_t hidden = hyper.Size("hidden", 32);
  WordEncoderDims dims;
  dims.char_dim = hyper.Size("char_dim", 16);
  dims.char_hidden = hyper.Size("char_hidden", 24);
  dims.word_dim = hyper.Size("word_dim", 32);
  const std::size_t epochs = hyper.Size("epochs", 15);
  const double lr = hyper.Real("lr", 0.003);
  const double clip = hyper.Real("clip", 5.0);
  const std::size_t min_count = hyper.Size("min_count", 2);
  const double word_drop = hyper.Real("word_drop", 0.1);
  hyper.CheckAllUsed();

  struct Example {
    const std::vector<std::string> *forms;
    std::vector<std::size_t> labels;
  };
  std::vector<Example> train;
  std::vector<std::string> forms;
  for (const auto &s : corpus) {
    if (s.tokens.empty()) continue;
    if (s.tags.size() != s.tokens.size())
      throw NerError(NerErrc::kBadCorpus, "tag count differs from token count");
    std::vector<EntitySpan> spans = BioDecode(s.tags);
    std::erase_if(spans, [](const EntitySpan &sp) {
      return std::find(kNeuralEntityTypes.begin(), kNeuralEntityTypes.end(), sp.type) ==
             kNeuralEntityTypes.end();
    });
    Example ex{&s.tokens, {}};
    for (const auto &tag : BioEncode(spans, s.tokens.size())) ex.labels.push_back(NerLabelIndex(tag));
    train.push_back(std::move(ex));
    forms.insert(forms.end(), s.tokens.begin(), s.tokens.end());
  }
  if (train.empty()) throw NerError(NerErrc::kEmptyTrainingSet, "no annotated sentences");

  std::vector<std::string> frequent;
  std::vector<char32_t> chars;
  CollectWordInventory(forms, min_count, &frequent, &chars);
  Rng rng(seed);
  NerModel model = MakeNerModel(
      MakeWordEncoder(std::move(frequent), std::move(chars), dims, std::move(embeddings), rng),
      hidden, rng);
  const std::vector<Var> params = model.Parameters();
  nn::ZeroGrads(params);
  nn::Adam adam({.learning_rate = lr, .clip_norm = clip});

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    rng.Shuffle(order);
    double total = 0.0;
    for (std::size_t i : order) {
      const Example &ex = train[i];
      std::vector<bool> keep(ex.forms->size(), true);
      if (word_drop > 0.0) {
        for (std::size_t t = 0; t < keep.size(); ++t) keep[t] = rng.Uniform() >= word_drop;
      }
      const Var loss = NerLoss(model, *ex.forms, ex.labels, &keep);
      total += loss.scalar();
      loss.Backward();
      adam.Step(params);
    }
    EpochRecord rec{epoch, total / train.size()};
    LogMessage(LogLevel::kDebug,
               "ner epoch " + std::to_string(epoch) + " loss " + std::to_string(rec.loss));
    if (log) log->push_back(rec);
  }
  return model;
}

}  // namespace deplima
