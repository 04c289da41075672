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

#include "deplima/archive.h"

#include <cstring>
#include <fstream>
#include <sstream>

namespace deplima::nn {
namespace {

constexpr char kMagic[4] = {'D', 'L', 'M', 'A'};

[[noreturn]] void Bad(const std::string &what) {
  throw NumericsError(NumericsErrc::kBadArchive, "model archive: " + what);
}

}  // namespace

namespace bytes {

void PutU32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void PutU64(std::string &out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void PutF64(std::string &out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  PutU64(out, bits);
}

void PutF32(std::string &out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  PutU32(out, bits);
}

std::string_view Reader::Take(std::size_t n) {
  if (n > data_.size() - pos_) Bad("truncated input");
  const auto out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t Reader::U8() { return static_cast<std::uint8_t>(Take(1)[0]); }

std::uint32_t Reader::U32() {
  const auto s = Take(4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[i]);
  return v;
}

std::uint64_t Reader::U64() {
  const auto s = Take(8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[i]);
  return v;
}

double Reader::F64() {
  const std::uint64_t bits = U64();
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

float Reader::F32() {
  const std::uint32_t bits = U32();
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace bytes

void ModelArchive::PutTensor(const std::string &name, const Tensor &t) {
  Tensor copy(t.shape, t.values);
  tensors_[name] = std::move(copy);
}

void ModelArchive::PutText(const std::string &name, std::string text) {
  texts_[name] = std::move(text);
}

bool ModelArchive::HasTensor(const std::string &name) const {
  return tensors_.count(name) > 0;
}

bool ModelArchive::HasText(const std::string &name) const {
  return texts_.count(name) > 0;
}

const Tensor &ModelArchive::GetTensor(const std::string &name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) Bad("missing tensor '" + name + "'");
  return it->second;
}

const std::string &ModelArchive::GetText(const std::string &name) const {
  auto it = texts_.find(name);
  if (it == texts_.end()) Bad("missing text section '" + name + "'");
  return it->second;
}

Var ModelArchive::GetParameter(const std::string &name,
                               const Shape &expected) const {
  const Tensor &t = GetTensor(name);
  if (t.shape != expected)
    Bad("tensor '" + name + "' has shape " + ShapeString(t.shape) +
        ", expected " + ShapeString(expected));
  return Parameter(Tensor(t.shape, t.values));
}

std::string ModelArchive::Serialize() const {
  std::string out(kMagic, 4);
  bytes::PutU32(out, kArchiveVersion);
  bytes::PutU32(out, static_cast<std::uint32_t>(tensors_.size() + texts_.size()));
  for (const auto &[name, t] : tensors_) {
    out.push_back('T');
    bytes::PutU32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    bytes::PutU32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape) bytes::PutU64(out, d);
    for (double v : t.values) bytes::PutF64(out, v);
  }
  for (const auto &[name, text] : texts_) {
    out.push_back('S');
    bytes::PutU32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    bytes::PutU64(out, text.size());
    out += text;
  }
  return out;
}

ModelArchive ModelArchive::Deserialize(std::string_view data) {
  bytes::Reader in(data);
  if (in.Take(4) != std::string_view(kMagic, 4)) Bad("bad magic");
  const std::uint32_t version = in.U32();
  if (version != kArchiveVersion)
    Bad("unsupported version " + std::to_string(version));
  const std::uint32_t count = in.U32();
  ModelArchive archive;
  for (std::uint32_t r = 0; r < count; ++r) {
    const char kind = static_cast<char>(in.U8());
    const std::uint32_t name_len = in.U32();
    std::string name(in.Take(name_len));
    if (kind == 'T') {
      const std::uint32_t rank = in.U32();
      if (rank > 8) Bad("rank too large");
      Shape shape(rank);
      for (auto &d : shape) d = in.U64();
      const std::size_t n = ShapeSize(shape);
      if (n > (data.size() - in.position()) / 8) Bad("truncated tensor " + name);
      std::vector<double> values(n);
      for (double &v : values) v = in.F64();
      archive.tensors_[name] = Tensor(std::move(shape), std::move(values));
    } else if (kind == 'S') {
      const std::uint64_t len = in.U64();
      archive.texts_[name] = std::string(in.Take(len));
    } else {
      Bad("unknown record kind");
    }
  }
  if (!in.done()) Bad("trailing bytes");
  return archive;
}

void ModelArchive::Save(const std::string &path) const {
  WriteFile(path, Serialize());
}

ModelArchive ModelArchive::Load(const std::string &path) {
  return Deserialize(ReadFile(path));
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string &path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("short write to '" + path + "'");
}

}  // namespace deplima::nn
