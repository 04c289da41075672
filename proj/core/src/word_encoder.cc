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

#include "deplima/word_encoder.h"

#include <map>
#include <set>

#include "deplima/error.h"
#include "deplima/utf8.h"

namespace deplima {

using nn::Constant;
using nn::Parameter;
using nn::Tensor;
using nn::Var;

void WordEncoder::Index() {
  word_index.clear();
  char_index.clear();
  for (std::size_t i = 0; i < frequent_words.size(); ++i) word_index.emplace(frequent_words[i], i);
  for (std::size_t i = 0; i < chars.size(); ++i) char_index.emplace(chars[i], i);
}

void WordEncoder::AttachEmbeddings(std::shared_ptr<const WordVectors> vectors) {
  if (!uses_pretrained) return;
  if (!vectors || vectors->dim() != word_dim)
    throw Error("model expects pretrained vectors of dimension " + std::to_string(word_dim));
  pretrained = std::move(vectors);
}

Var WordEncoder::Base(const std::string &form, bool use_trainable) const {
  Var base;
  if (uses_pretrained) {
    if (!pretrained) throw Error("no pretrained vectors attached");
    base = Constant(Tensor::Vector(pretrained->Lookup(form)));
  } else {
    base = Constant(Tensor({word_dim}));
  }
  if (use_trainable) {
    auto it = word_index.find(form);
    if (it != word_index.end()) base = nn::Add(base, nn::Row(word_table, it->second));
  }
  return base;
}

Var WordEncoder::Input(const std::string &form, bool use_trainable) const {
  std::vector<std::size_t> ids;
  for (char32_t c : utf8::Decode(form)) {
    auto it = char_index.find(c);
    ids.push_back(it == char_index.end() ? chars.size() : it->second);
  }
  Var state;
  if (ids.empty()) {
    state = nn::GruFinalState(char_rnn, {});
  } else {
    const std::vector<Var> rows = nn::Unstack(nn::GatherRows(char_table, ids));
    state = nn::GruFinalState(char_rnn, rows);
  }
  const Var parts[] = {Base(form, use_trainable), state};
  return nn::Concat(parts);
}

void WordEncoder::Put(nn::ModelArchive &a, const std::string &prefix) const {
  std::string words, cs;
  for (const auto &w : frequent_words) words += utf8::EscapeField(w) + '\n';
  for (char32_t c : chars) cs += std::to_string(static_cast<std::uint32_t>(c)) + '\n';
  a.PutText(prefix + "/words", words);
  a.PutText(prefix + "/chars", cs);
  a.PutText(prefix + "/meta", "word_dim " + std::to_string(word_dim) + "\npretrained " +
                                  (uses_pretrained ? "1" : "0") + "\n");
  a.PutVar(prefix + "/words", word_table);
  a.PutVar(prefix + "/chars", char_table);
  nn::PutGru(a, prefix + "/char_rnn", char_rnn);
}

WordEncoder WordEncoder::Get(const nn::ModelArchive &a, const std::string &prefix) {
  WordEncoder e;
  for (const auto &l : utf8::Split(a.GetText(prefix + "/words"), '\n')) {
    if (!l.empty()) e.frequent_words.push_back(utf8::UnescapeField(l));
  }
  for (const auto &l : utf8::Split(a.GetText(prefix + "/chars"), '\n')) {
    if (!l.empty()) e.chars.push_back(static_cast<char32_t>(std::stoul(l)));
  }
  for (const auto &line : utf8::Split(a.GetText(prefix + "/meta"), '\n')) {
    const auto kv = utf8::Split(line, ' ');
    if (kv.size() != 2) continue;
    if (kv[0] == "word_dim") e.word_dim = std::stoul(kv[1]);
    if (kv[0] == "pretrained") e.uses_pretrained = kv[1] == "1";
  }
  e.Index();
  const auto &ct = a.GetTensor(prefix + "/chars");
  if (ct.rank() != 2)
    throw nn::NumericsError(nn::NumericsErrc::kBadArchive, "bad character table " + prefix);
  e.word_table = a.GetParameter(prefix + "/words", {e.frequent_words.size(), e.word_dim});
  e.char_table = a.GetParameter(prefix + "/chars", {e.chars.size() + 1, ct.cols()});
  e.char_rnn = nn::GetGru(a, prefix + "/char_rnn");
  if (e.char_rnn.input_dim() != ct.cols())
    throw nn::NumericsError(nn::NumericsErrc::kBadArchive, "character GRU size mismatch");
  return e;
}

WordEncoder MakeWordEncoder(std::vector<std::string> frequent_words, std::vector<char32_t> chars,
                            const WordEncoderDims &dims,
                            std::shared_ptr<const WordVectors> pretrained, Rng &rng) {
  WordEncoder e;
  e.frequent_words = std::move(frequent_words);
  e.chars = std::move(chars);
  e.Index();
  e.uses_pretrained = pretrained != nullptr;
  e.word_dim = pretrained ? pretrained->dim() : dims.word_dim;
  e.pretrained = std::move(pretrained);
  e.word_table = Parameter(Tensor({e.frequent_words.size(), e.word_dim}));
  e.char_table = Parameter(nn::XavierUniform({e.chars.size() + 1, dims.char_dim}, rng));
  e.char_rnn = nn::MakeGru(dims.char_dim, dims.char_hidden, rng);
  return e;
}

void CollectWordInventory(const std::vector<std::string> &forms, std::size_t min_count,
                          std::vector<std::string> *frequent, std::vector<char32_t> *chars) {
  std::map<std::string, std::size_t> counts;
  std::set<char32_t> cs;
  for (const auto &f : forms) {
    ++counts[f];
    for (char32_t c : utf8::Decode(f)) cs.insert(c);
  }
  frequent->clear();
  for (const auto &[w, c] : counts) {
    if (c >= min_count) frequent->push_back(w);
  }
  chars->assign(cs.begin(), cs.end());
}

}  // namespace deplima
