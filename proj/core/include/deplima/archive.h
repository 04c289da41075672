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

#ifndef DEPLIMA_ARCHIVE_H_
#define DEPLIMA_ARCHIVE_H_

// Sectioned binary model container shared by every model file:
//
//   "DLMA" | u32 version | u32 record count | records...
//   record := u8 kind | u32 name length | name bytes | body
//   kind 'T' (tensor) body := u32 rank | u64 dims[rank] | f64 values (LE)
//   kind 'S' (text)   body := u64 byte length | UTF-8 bytes
//
// All integers are little-endian. Records are written sorted by kind then
// name, so identical models serialize to identical bytes.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "deplima/tensor.h"

namespace deplima::nn {

inline constexpr std::uint32_t kArchiveVersion = 1;

class ModelArchive {
 public:
  void PutTensor(const std::string &name, const Tensor &t);
  void PutVar(const std::string &name, const Var &v) {
    PutTensor(name, v.tensor());
  }
  void PutText(const std::string &name, std::string text);

  bool HasTensor(const std::string &name) const;
  bool HasText(const std::string &name) const;
  // Throws kBadArchive when absent.
  const Tensor &GetTensor(const std::string &name) const;
  const std::string &GetText(const std::string &name) const;
  // Parameter leaf initialized from the named tensor, checked against shape.
  Var GetParameter(const std::string &name, const Shape &expected) const;

  std::string Serialize() const;
  static ModelArchive Deserialize(std::string_view bytes);

  void Save(const std::string &path) const;
  static ModelArchive Load(const std::string &path);

  const std::map<std::string, Tensor> &tensors() const { return tensors_; }
  const std::map<std::string, std::string> &texts() const { return texts_; }

 private:
  std::map<std::string, Tensor> tensors_;
  std::map<std::string, std::string> texts_;
};

// Small helpers for little-endian byte streams, shared with the quantized
// embedding store.
namespace bytes {
void PutU32(std::string &out, std::uint32_t v);
void PutU64(std::string &out, std::uint64_t v);
void PutF64(std::string &out, double v);
void PutF32(std::string &out, float v);

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  std::uint8_t U8();
  std::uint32_t U32();
  std::uint64_t U64();
  double F64();
  float F32();
  std::string_view Take(std::size_t n);
  bool done() const { return pos_ == data_.size(); }
  std::size_t position() const { return pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};
}  // namespace bytes

std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, std::string_view contents);

}  // namespace deplima::nn

#endif  // DEPLIMA_ARCHIVE_H_
