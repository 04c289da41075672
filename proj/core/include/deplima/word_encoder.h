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

#ifndef DEPLIMA_WORD_ENCODER_H_
#define DEPLIMA_WORD_ENCODER_H_

// Word representation shared by the word-level taggers: a pretrained
// vector plus a trainable vector for frequent words, concatenated with the
// final state of a character GRU over the word.

#include <cstddef>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "deplima/archive.h"
#include "deplima/embeddings.h"
#include "deplima/rnn.h"

namespace deplima {

class Rng;

struct WordEncoderDims {
  std::size_t word_dim = 32;  // ignored when pretrained vectors are given
  std::size_t char_dim = 16;
  std::size_t char_hidden = 32;
};

struct WordEncoder {
  std::vector<std::string> frequent_words;  // rows of word_table
  std::vector<char32_t> chars;              // rows of char_table
  std::unordered_map<std::string, std::size_t> word_index;
  std::unordered_map<char32_t, std::size_t> char_index;
  std::size_t word_dim = 0;
  bool uses_pretrained = false;
  std::shared_ptr<const WordVectors> pretrained;

  nn::Var word_table;  // [F, word_dim], zero-initialized
  nn::Var char_table;  // [C + 1, char_dim], last row unknown
  nn::GruParams char_rnn;

  std::size_t output_dim() const { return word_dim + char_rnn.hidden_dim(); }
  std::vector<nn::Var> Parameters() const { return {word_table, char_table, char_rnn.wx, char_rnn.uh, char_rnn.b}; }
  void Index();

  // Throws deplima::Error when the model needs pretrained vectors of
  // another dimension.
  void AttachEmbeddings(std::shared_ptr<const WordVectors> vectors);

  // Pretrained vector (zero without a table) plus the trainable vector of
  // a frequent word.
  nn::Var Base(const std::string &form, bool use_trainable = true) const;
  nn::Var Input(const std::string &form, bool use_trainable = true) const;

  // Records "<prefix>/words", "<prefix>/chars", "<prefix>/char_rnn/..."
  // and "<prefix>/meta".
  void Put(nn::ModelArchive &archive, const std::string &prefix) const;
  static WordEncoder Get(const nn::ModelArchive &archive, const std::string &prefix);
};

WordEncoder MakeWordEncoder(std::vector<std::string> frequent_words, std::vector<char32_t> chars,
                            const WordEncoderDims &dims,
                            std::shared_ptr<const WordVectors> pretrained, Rng &rng);

// Sorted words with count >= min_count and sorted distinct characters.
void CollectWordInventory(const std::vector<std::string> &forms, std::size_t min_count,
                          std::vector<std::string> *frequent, std::vector<char32_t> *chars);

}  // namespace deplima

#endif  // DEPLIMA_WORD_ENCODER_H_
