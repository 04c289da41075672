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

#include "deplima/conllu.h"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <utility>

#include "deplima/utf8.h"

namespace deplima {
namespace {

constexpr char kEmpty[] = "_";

std::string FromField(std::string_view f) {
  return f == kEmpty ? std::string() : std::string(f);
}

const std::string &ToField(const std::string &s) {
  static const std::string empty = kEmpty;
  return s.empty() ? empty : s;
}

bool ParseInt(std::string_view s, int *out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool HasLineBreakOrTab(const std::string &s) {
  return s.find_first_of("\t\n\r") != std::string::npos;
}

ConlluToken ParseRow(std::string_view line, std::size_t line_no) {
  std::vector<std::string_view> cols;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    cols.push_back(line.substr(pos, tab == std::string_view::npos
                                        ? std::string_view::npos
                                        : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  if (cols.size() != 10)
    throw ConlluError(ConlluErrc::kBadColumnCount, line_no,
                      "line " + std::to_string(line_no) + ": expected 10 columns, got " +
                          std::to_string(cols.size()));
  ConlluToken tok;
  const std::string_view id = cols[0];
  if (id.find('.') != std::string_view::npos)
    throw ConlluError(ConlluErrc::kEmptyNode, line_no,
                      "line " + std::to_string(line_no) +
                          ": empty nodes are not supported (" + std::string(id) + ")");
  const std::size_t dash = id.find('-');
  if (dash != std::string_view::npos) {
    if (!ParseInt(id.substr(0, dash), &tok.first) ||
        !ParseInt(id.substr(dash + 1), &tok.last) || tok.first < 1 ||
        tok.last < tok.first)
      throw ConlluError(ConlluErrc::kBadId, line_no,
                        "line " + std::to_string(line_no) + ": bad range id '" +
                            std::string(id) + "'");
    tok.is_range = true;
  } else {
    if (!ParseInt(id, &tok.first) || tok.first < 1)
      throw ConlluError(ConlluErrc::kBadId, line_no,
                        "line " + std::to_string(line_no) + ": bad id '" +
                            std::string(id) + "'");
    tok.last = tok.first;
  }
  tok.form = std::string(cols[1]);
  tok.lemma = std::string(cols[2]);
  tok.upos = FromField(cols[3]);
  tok.xpos = FromField(cols[4]);
  tok.feats = ParseFeatures(cols[5]);
  if (cols[6] != kEmpty) {
    int head = 0;
    if (!ParseInt(cols[6], &head) || head < 0)
      throw ConlluError(ConlluErrc::kBadHead, line_no,
                        "line " + std::to_string(line_no) + ": bad head '" +
                            std::string(cols[6]) + "'");
    tok.head = head;
  }
  tok.deprel = FromField(cols[7]);
  tok.deps = FromField(cols[8]);
  tok.misc = FromField(cols[9]);
  return tok;
}

// Checks ids and heads once a sentence is complete. `lines` holds the
// 1-based line number of every token row.
void CheckSentence(const ConlluSentence &s, const std::vector<std::size_t> &lines,
                   std::size_t sentence_no) {
  int expected = 1;
  for (const auto &t : s.tokens) {
    if (t.is_range) continue;
    if (t.first != expected)
      throw ConlluError(ConlluErrc::kNonContiguousIds, sentence_no,
                        "sentence " + std::to_string(sentence_no) + ": expected id " +
                            std::to_string(expected) + ", got " +
                            std::to_string(t.first));
    ++expected;
  }
  const int n = expected - 1;
  if (n == 0)
    throw ConlluError(ConlluErrc::kEmptySentence, sentence_no,
                      "sentence " + std::to_string(sentence_no) + " has no words");
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const auto &t = s.tokens[i];
    if (t.is_range) {
      if (t.last > n)
        throw ConlluError(ConlluErrc::kBadId, lines[i],
                          "line " + std::to_string(lines[i]) + ": range " +
                              t.IdString() + " exceeds sentence length");
      continue;
    }
    if (t.head && (*t.head > n || *t.head == t.first))
      throw ConlluError(ConlluErrc::kBadHead, lines[i],
                        "line " + std::to_string(lines[i]) + ": head " +
                            std::to_string(*t.head) + " invalid for id " +
                            std::to_string(t.first));
  }
}

void CheckWritable(const ConlluDocument &doc) {
  auto fail = [](const std::string &what) {
    throw ConlluError(ConlluErrc::kInvariantViolation, 0, what);
  };
  if (doc.sentences.empty()) fail("document has no sentences");
  for (std::size_t si = 0; si < doc.sentences.size(); ++si) {
    const auto &s = doc.sentences[si];
    for (const auto &c : s.comments)
      if (c.empty() || c[0] != '#' || c.find('\n') != std::string::npos)
        fail("bad comment line in sentence " + std::to_string(si + 1));
    int expected = 1;
    int n = 0;
    for (const auto &t : s.tokens)
      if (!t.is_range) ++n;
    if (n == 0) fail("sentence " + std::to_string(si + 1) + " has no words");
    for (const auto &t : s.tokens) {
      const std::string where =
          "sentence " + std::to_string(si + 1) + " token " + t.IdString();
      if (t.form.empty() || t.lemma.empty()) fail(where + ": empty form or lemma");
      for (const std::string *f :
           {&t.form, &t.lemma, &t.upos, &t.xpos, &t.deprel, &t.deps, &t.misc})
        if (HasLineBreakOrTab(*f)) fail(where + ": field contains a tab or newline");
      for (const std::string *f : {&t.upos, &t.xpos, &t.deprel, &t.deps, &t.misc})
        if (*f == kEmpty) fail(where + ": literal '_' in an optional column");
      for (const auto &[k, v] : t.feats)
        if (k.empty() || v.empty() ||
            (k + v).find_first_of("=|\t\n") != std::string::npos)
          fail(where + ": bad feature " + k + "=" + v);
      if (t.is_range) {
        if (t.first < expected || t.last < t.first || t.last > n)
          fail(where + ": bad range");
        continue;
      }
      if (t.first != expected || t.last != t.first) fail(where + ": bad id");
      ++expected;
      if (t.head && (*t.head < 0 || *t.head > n || *t.head == t.first))
        fail(where + ": bad head");
    }
  }
}

std::string JoinLines(const std::vector<std::string> &lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

// Range row payload stored on the first covered word: "<count>\t" followed
// by columns 2..10 as written.
std::string EncodeRange(const ConlluToken &t) {
  std::ostringstream os;
  os << (t.last - t.first + 1) << '\t' << t.form << '\t' << t.lemma << '\t'
     << ToField(t.upos) << '\t' << ToField(t.xpos) << '\t'
     << ToField(FormatFeatures(t.feats)) << '\t'
     << (t.head ? std::to_string(*t.head) : std::string(kEmpty)) << '\t'
     << ToField(t.deprel) << '\t' << ToField(t.deps) << '\t' << ToField(t.misc);
  return os.str();
}

ConlluToken DecodeRange(const std::string &payload, int first) {
  const std::size_t tab = payload.find('\t');
  int count = 0;
  if (tab == std::string::npos || !ParseInt(payload.substr(0, tab), &count) ||
      count < 1)
    throw ConlluError(ConlluErrc::kInvariantViolation, 0,
                      "bad multiword annotation '" + payload + "'");
  ConlluToken t = ParseRow(std::to_string(first) + "-" +
                               std::to_string(first + count - 1) +
                               payload.substr(tab),
                           0);
  return t;
}

// Code point offsets of each form inside `text`, or empty when the forms
// cannot be found in order.
std::vector<TokenSpan> AlignForms(const std::vector<const ConlluToken *> &words,
                                  const std::u32string &text, std::size_t base) {
  std::vector<TokenSpan> spans;
  std::size_t pos = 0;
  for (const auto *w : words) {
    const std::u32string form = utf8::Decode(w->form);
    while (pos < text.size() && utf8::IsSpace(text[pos])) ++pos;
    if (text.compare(pos, form.size(), form) != 0) return {};
    spans.push_back({w->form, base + pos, base + pos + form.size()});
    pos += form.size();
  }
  return spans;
}

}  // namespace

std::string FormatFeatures(const Features &feats) {
  std::string out;
  for (const auto &[k, v] : feats) {
    if (!out.empty()) out.push_back('|');
    out += k;
    out.push_back('=');
    out += v;
  }
  return out;
}

Features ParseFeatures(std::string_view text) {
  Features feats;
  if (text.empty() || text == kEmpty) return feats;
  for (const auto &pair : utf8::Split(text, '|')) {
    const std::size_t eq = pair.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConlluError(ConlluErrc::kInvariantViolation, 0,
                        "bad feature '" + pair + "'");
    feats[pair.substr(0, eq)] = pair.substr(eq + 1);
  }
  return feats;
}

std::string ConlluToken::IdString() const {
  return is_range ? std::to_string(first) + "-" + std::to_string(last)
                  : std::to_string(first);
}

std::vector<const ConlluToken *> ConlluSentence::Words() const {
  std::vector<const ConlluToken *> out;
  for (const auto &t : tokens)
    if (!t.is_range) out.push_back(&t);
  return out;
}

std::vector<ConlluToken *> ConlluSentence::MutableWords() {
  std::vector<ConlluToken *> out;
  for (auto &t : tokens)
    if (!t.is_range) out.push_back(&t);
  return out;
}

std::optional<std::string> ConlluSentence::Text() const {
  static const std::string prefix = "# text =";
  for (const auto &c : comments) {
    if (c.rfind(prefix, 0) != 0) continue;
    std::string rest = c.substr(prefix.size());
    if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
    return rest;
  }
  return std::nullopt;
}

std::size_t ConlluDocument::WordCount() const {
  std::size_t n = 0;
  for (const auto &s : sentences) n += s.Words().size();
  return n;
}

ConlluDocument ParseConllu(std::string_view text) {
  ConlluDocument doc;
  ConlluSentence current;
  std::vector<std::size_t> lines;
  bool open = false;
  auto close = [&]() {
    if (!open) return;
    CheckSentence(current, lines, doc.sentences.size() + 1);
    doc.sentences.push_back(std::move(current));
    current = ConlluSentence();
    lines.clear();
    open = false;
  };
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (open && current.tokens.empty())
        throw ConlluError(ConlluErrc::kEmptySentence, doc.sentences.size() + 1,
                          "comments without tokens before line " +
                              std::to_string(line_no));
      close();
      continue;
    }
    open = true;
    if (line[0] == '#') {
      current.comments.emplace_back(line);
      continue;
    }
    current.tokens.push_back(ParseRow(line, line_no));
    lines.push_back(line_no);
  }
  if (open && current.tokens.empty())
    throw ConlluError(ConlluErrc::kEmptySentence, doc.sentences.size() + 1,
                      "trailing comments without tokens");
  close();
  if (doc.sentences.empty())
    throw ConlluError(ConlluErrc::kEmptyDocument, 0, "document has no sentences");
  return doc;
}

std::string WriteConllu(const ConlluDocument &doc) {
  CheckWritable(doc);
  std::string out;
  for (const auto &s : doc.sentences) {
    for (const auto &c : s.comments) {
      out += c;
      out.push_back('\n');
    }
    for (const auto &t : s.tokens) {
      out += t.IdString();
      for (const std::string *f : {&t.form, &t.lemma, &ToField(t.upos),
                                   &ToField(t.xpos)}) {
        out.push_back('\t');
        out += *f;
      }
      out.push_back('\t');
      out += ToField(FormatFeatures(t.feats));
      out.push_back('\t');
      out += t.head ? std::to_string(*t.head) : std::string(kEmpty);
      for (const std::string *f :
           {&ToField(t.deprel), &ToField(t.deps), &ToField(t.misc)}) {
        out.push_back('\t');
        out += *f;
      }
      out.push_back('\n');
    }
    out.push_back('\n');
  }
  return out;
}

AnalysisGraph ConlluToGraph(const ConlluDocument &doc) {
  std::vector<TokenSpan> spans;
  std::vector<Annotations> notes;
  std::size_t base = 0;
  for (std::size_t si = 0; si < doc.sentences.size(); ++si) {
    const auto &s = doc.sentences[si];
    const auto words = s.Words();
    std::vector<TokenSpan> local;
    if (auto t = s.Text()) local = AlignForms(words, utf8::Decode(*t), base);
    if (local.empty()) {
      std::size_t p = base;
      for (const auto *w : words) {
        const std::size_t len = std::max<std::size_t>(1, utf8::Decode(w->form).size());
        local.push_back({w->form, p, p + len});
        p += len + 1;
      }
    }
    std::map<int, std::string> ranges;
    for (const auto &t : s.tokens)
      if (t.is_range) ranges[t.first] = EncodeRange(t);
    for (std::size_t i = 0; i < words.size(); ++i) {
      const auto *w = words[i];
      Annotations a;
      a["lemma"] = w->lemma;
      if (!w->upos.empty()) a["upos"] = w->upos;
      if (!w->xpos.empty()) a["xpos"] = w->xpos;
      if (!w->feats.empty()) a["feats"] = FormatFeatures(w->feats);
      if (!w->deps.empty()) a["deps"] = w->deps;
      if (!w->misc.empty()) a["misc"] = w->misc;
      if (!w->head && !w->deprel.empty()) a["deprel"] = w->deprel;
      a[kSentenceKey] = std::to_string(si);
      if (i == 0) {
        a["sent:comments"] = JoinLines(s.comments);
        if (auto t = s.Text()) a["sent:text"] = *t;
      }
      if (auto it = ranges.find(w->first); it != ranges.end()) a["mwt"] = it->second;
      notes.push_back(std::move(a));
    }
    base = local.back().char_end + 1;
    spans.insert(spans.end(), local.begin(), local.end());
  }
  AnalysisGraph g = AnalysisGraph::Linear(spans);
  std::vector<NodeId> path = g.FirstPath();
  std::size_t k = 0;
  for (std::size_t si = 0; si < doc.sentences.size(); ++si) {
    const auto words = doc.sentences[si].Words();
    const std::size_t first = k;
    for (std::size_t i = 0; i < words.size(); ++i, ++k) {
      g.node(path[k]).annotations = std::move(notes[k]);
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
      const auto *w = words[i];
      if (!w->head) continue;
      const NodeId head =
          *w->head == 0 ? AnalysisGraph::kStart : path[first + *w->head - 1];
      g.AddDependency(head, path[first + i], w->deprel);
    }
  }
  return g;
}

std::vector<std::vector<NodeId>> SentencesOf(const AnalysisGraph &graph) {
  std::vector<std::vector<NodeId>> out;
  std::string last;
  for (NodeId id : graph.FirstPath()) {
    const std::string s = graph.node(id).annotation(kSentenceKey, "0");
    if (out.empty() || s != last) out.emplace_back();
    out.back().push_back(id);
    last = s;
  }
  return out;
}

ConlluDocument GraphToConllu(const AnalysisGraph &graph) {
  ConlluDocument doc;
  const auto sentences = SentencesOf(graph);
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const auto &ids = sentences[si];
    std::map<NodeId, int> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = static_cast<int>(i + 1);
    ConlluSentence s;
    const TokenNode &first = graph.node(ids.front());
    if (auto it = first.annotations.find("sent:comments");
        it != first.annotations.end()) {
      if (!it->second.empty()) s.comments = utf8::Split(it->second, '\n');
    } else {
      s.comments.push_back("# sent_id = " + std::to_string(si + 1));
      if (auto t = first.annotations.find("sent:text"); t != first.annotations.end())
        s.comments.push_back("# text = " + t->second);
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const TokenNode &n = graph.node(ids[i]);
      if (auto it = n.annotations.find("mwt"); it != n.annotations.end())
        s.tokens.push_back(DecodeRange(it->second, static_cast<int>(i + 1)));
      ConlluToken t;
      t.first = t.last = static_cast<int>(i + 1);
      t.form = n.surface.empty() ? std::string(kEmpty) : n.surface;
      t.lemma = n.annotation("lemma", kEmpty);
      if (t.lemma.empty()) t.lemma = kEmpty;
      t.upos = n.annotation("upos");
      t.xpos = n.annotation("xpos");
      t.feats = ParseFeatures(n.annotation("feats"));
      t.deps = n.annotation("deps");
      t.misc = n.annotation("misc");
      if (auto e = graph.HeadOf(ids[i])) {
        if (e->head == AnalysisGraph::kStart) {
          t.head = 0;
        } else {
          auto h = index.find(e->head);
          if (h == index.end())
            throw ConlluError(ConlluErrc::kInvariantViolation, si + 1,
                              "dependency crosses a sentence boundary");
          t.head = h->second;
        }
        t.deprel = e->deprel;
      } else {
        t.deprel = n.annotation("deprel");
      }
      s.tokens.push_back(std::move(t));
    }
    doc.sentences.push_back(std::move(s));
  }
  return doc;
}

}  // namespace deplima
