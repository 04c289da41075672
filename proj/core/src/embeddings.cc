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

#include "deplima/embeddings.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "deplima/archive.h"
#include "deplima/rng.h"
#include "deplima/utf8.h"

namespace deplima {
namespace {

constexpr char kMagic[] = "DLQ8";
constexpr std::uint32_t kVersion = 1;

double SquaredDistance(const double *a, const double *b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double x = a[i] - b[i];
    s += x * x;
  }
  return s;
}

[[noreturn]] void FormatError(const std::string &what) {
  throw EmbeddingError(EmbeddingErrc::kBadFormat, what);
}

}  // namespace

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> CharNgrams(std::string_view word, std::size_t min_n,
                                    std::size_t max_n) {
  std::u32string w = U"<";
  w += utf8::Decode(word);
  w += U">";
  std::vector<std::string> out;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t n = min_n; n <= max_n && i + n <= w.size(); ++n)
      out.push_back(utf8::Encode(std::u32string_view(w).substr(i, n)));
  return out;
}

std::vector<std::size_t> NgramBuckets(std::string_view word, std::size_t buckets) {
  std::vector<std::size_t> out;
  for (const auto &g : CharNgrams(word)) out.push_back(Fnv1a64(g) % buckets);
  return out;
}

// ---- SubwordTable ----

SubwordTable::SubwordTable(std::size_t dim, std::size_t buckets)
    : dim_(dim), buckets_(buckets), bucket_values_(dim * buckets, 0.0) {
  if (dim == 0 || buckets == 0)
    throw EmbeddingError(EmbeddingErrc::kEmptyTable, "dim and bucket count must be positive");
}

SubwordTable SubwordTable::FromText(std::string_view text, std::size_t buckets) {
  const auto lines = utf8::Split(text, '\n');
  if (lines.empty()) FormatError("empty vector file");
  std::size_t rows = 0, dim = 0;
  {
    const std::string_view header = utf8::Trim(lines[0]);
    const std::size_t sp = header.find(' ');
    if (sp == std::string_view::npos) FormatError("header must be 'rows dim'");
    auto parse = [](std::string_view s, std::size_t *v) {
      s = utf8::Trim(s);
      const auto r = std::from_chars(s.data(), s.data() + s.size(), *v);
      return r.ec == std::errc() && r.ptr == s.data() + s.size();
    };
    if (!parse(header.substr(0, sp), &rows) || !parse(header.substr(sp + 1), &dim) ||
        dim == 0)
      FormatError("header must be 'rows dim'");
  }
  SubwordTable table(dim, buckets);
  std::vector<double> vec(dim);
  std::size_t seen = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string_view line = utf8::Trim(lines[li]);
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos < line.size()) {
      std::size_t end = line.find(' ', pos);
      if (end == std::string_view::npos) end = line.size();
      if (end > pos) fields.push_back(line.substr(pos, end - pos));
      pos = end + 1;
    }
    if (fields.size() != dim + 1)
      FormatError("line " + std::to_string(li + 1) + ": expected " + std::to_string(dim + 1) +
                  " fields, got " + std::to_string(fields.size()));
    for (std::size_t i = 0; i < dim; ++i) {
      const std::string f(fields[i + 1]);
      char *end = nullptr;
      vec[i] = std::strtod(f.c_str(), &end);
      if (end != f.c_str() + f.size() || !std::isfinite(vec[i]))
        FormatError("line " + std::to_string(li + 1) + ": bad number '" + f + "'");
    }
    table.SetWord(std::string(fields[0]), vec);
    ++seen;
  }
  if (seen != rows)
    FormatError("header announces " + std::to_string(rows) + " rows, found " +
                std::to_string(seen));
  table.DeriveBuckets();
  return table;
}

std::string SubwordTable::ToText() const {
  std::string out = std::to_string(words_.size()) + " " + std::to_string(dim_) + "\n";
  char buf[64];
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out += words_[i];
    for (double v : WordRow(i)) {
      const auto r = std::to_chars(buf, buf + sizeof(buf), v);
      out.push_back(' ');
      out.append(buf, r.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

void SubwordTable::SetWord(const std::string &word, std::span<const double> vec) {
  if (vec.size() != dim_)
    throw EmbeddingError(EmbeddingErrc::kDimMismatch,
                         "vector for '" + word + "' has dim " + std::to_string(vec.size()));
  auto [it, inserted] = index_.emplace(word, words_.size());
  if (inserted) {
    words_.push_back(word);
    word_values_.resize(word_values_.size() + dim_);
  }
  double *dst = &word_values_[it->second * dim_];
  for (std::size_t i = 0; i < dim_; ++i) dst[i] = static_cast<float>(vec[i]);
}

std::span<double> SubwordTable::MutableBucket(std::size_t b) {
  return std::span<double>(bucket_values_).subspan(b * dim_, dim_);
}

void SubwordTable::DeriveBuckets() {
  std::fill(bucket_values_.begin(), bucket_values_.end(), 0.0);
  std::vector<std::size_t> counts(buckets_, 0);
  for (std::size_t w = 0; w < words_.size(); ++w) {
    auto b = NgramBuckets(words_[w], buckets_);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    const auto row = WordRow(w);
    for (std::size_t id : b) {
      ++counts[id];
      double *dst = &bucket_values_[id * dim_];
      for (std::size_t i = 0; i < dim_; ++i) dst[i] += row[i];
    }
  }
  for (std::size_t b = 0; b < buckets_; ++b)
    if (counts[b] > 1)
      for (std::size_t i = 0; i < dim_; ++i)
        bucket_values_[b * dim_ + i] =
            static_cast<float>(bucket_values_[b * dim_ + i] / counts[b]);
}

std::span<const double> SubwordTable::WordRow(std::size_t i) const {
  return std::span<const double>(word_values_).subspan(i * dim_, dim_);
}

std::span<const double> SubwordTable::BucketRow(std::size_t b) const {
  return std::span<const double>(bucket_values_).subspan(b * dim_, dim_);
}

bool SubwordTable::Contains(std::string_view word) const {
  return index_.count(std::string(word)) > 0;
}

std::vector<double> SubwordTable::Lookup(std::string_view word) const {
  if (auto it = index_.find(std::string(word)); it != index_.end()) {
    const auto row = WordRow(it->second);
    return {row.begin(), row.end()};
  }
  std::vector<double> out(dim_, 0.0);
  const auto ids = NgramBuckets(word, buckets_);
  if (ids.empty()) return out;
  for (std::size_t b : ids) {
    const auto row = BucketRow(b);
    for (std::size_t i = 0; i < dim_; ++i) out[i] += row[i];
  }
  for (double &v : out) v /= static_cast<double>(ids.size());
  return out;
}

// ---- k-means ----

KMeansResult KMeans(std::span<const double> points, std::size_t d, std::size_t k,
                    std::size_t iterations, Rng &rng) {
  const std::size_t n = points.size() / d;
  if (n == 0 || k == 0) throw EmbeddingError(EmbeddingErrc::kEmptyTable, "k-means on no points");
  KMeansResult r;
  r.centroids.assign(k * d, 0.0);
  r.assignment.assign(n, 0);
  const double *p = points.data();

  // k-means++ seeding.
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::size_t chosen = 0;
  std::size_t first = rng.Index(n);
  std::copy(p + first * d, p + first * d + d, r.centroids.begin());
  chosen = 1;
  while (chosen < k) {
    const double *last = &r.centroids[(chosen - 1) * d];
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], SquaredDistance(p + i * d, last, d));
      total += dist[i];
    }
    if (total <= 0.0) break;
    double target = rng.Uniform() * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      target -= dist[i];
      if (target < 0.0 && dist[i] > 0.0) {
        pick = i;
        break;
      }
    }
    while (dist[pick] <= 0.0 && pick > 0) --pick;
    std::copy(p + pick * d, p + pick * d + d, r.centroids.begin() + chosen * d);
    ++chosen;
  }
  // Fewer distinct points than k: repeat the chosen centroids.
  for (std::size_t c = chosen; c < k; ++c)
    std::copy(r.centroids.begin() + (c % chosen) * d,
              r.centroids.begin() + (c % chosen) * d + d, r.centroids.begin() + c * d);

  auto assign = [&]() {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double dd = SquaredDistance(p + i * d, &r.centroids[c * d], d);
        if (dd < best) {
          best = dd;
          arg = static_cast<std::uint32_t>(c);
        }
      }
      r.assignment[i] = arg;
      obj += best;
    }
    return obj;
  };

  r.objective.push_back(assign());
  std::vector<double> sums(k * d);
  std::vector<std::size_t> counts(k);
  std::vector<std::size_t> anchor(k);
  for (std::size_t it = 0; it < iterations; ++it) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = r.assignment[i];
      if (counts[c]++ == 0) anchor[c] = i;
      const double *a = p + anchor[c] * d;
      for (std::size_t j = 0; j < d; ++j) sums[c * d + j] += p[i * d + j] - a[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      const double *a = p + anchor[c] * d;
      for (std::size_t j = 0; j < d; ++j)
        r.centroids[c * d + j] = a[j] + sums[c * d + j] / static_cast<double>(counts[c]);
    }
    const double obj = assign();
    const double prev = r.objective.back();
    if (obj > prev + 1e-9 * std::max(1.0, prev))
      throw Error("k-means objective increased from " + std::to_string(prev) +
                               " to " + std::to_string(obj));
    r.objective.push_back(obj);
  }
  return r;
}

// ---- QuantizedTable ----

QuantizedTable QuantizedTable::Quantize(const SubwordTable &table,
                                        const QuantizeOptions &options,
                                        QuantizeReport *report) {
  const std::size_t dim = table.dim();
  const std::size_t m = options.subquantizers ? options.subquantizers : dim / 2;
  const std::size_t k = options.codebook_size;
  if (m == 0 || dim % m != 0)
    throw EmbeddingError(EmbeddingErrc::kBadSubquantizerCount,
                         "subquantizer count " + std::to_string(m) + " does not divide dim " +
                             std::to_string(dim));
  if (k == 0 || k > 256)
    throw EmbeddingError(EmbeddingErrc::kBadSubquantizerCount,
                         "codebook size must be in [1, 256]");
  const std::size_t ds = dim / m;
  const std::size_t rows = table.word_count() + table.buckets();
  auto row = [&](std::size_t r) {
    return r < table.word_count() ? table.WordRow(r) : table.BucketRow(r - table.word_count());
  };

  QuantizedTable q;
  q.dim_ = dim;
  q.m_ = m;
  q.k_ = k;
  q.buckets_ = table.buckets();
  q.words_ = table.words();
  for (std::size_t i = 0; i < q.words_.size(); ++i) q.index_[q.words_[i]] = i;
  q.codebooks_.assign(m * k * ds, 0.0f);
  q.codes_.assign(rows * m, 0);

  Rng rng(options.seed);
  std::vector<std::size_t> sample(rows);
  std::iota(sample.begin(), sample.end(), 0);
  if (rows > options.max_training_rows) {
    rng.Shuffle(sample);
    sample.resize(options.max_training_rows);
    std::sort(sample.begin(), sample.end());
  }
  double init_obj = 0.0, final_obj = 0.0, sq_err = 0.0;
  std::vector<double> slice(sample.size() * ds);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t s = 0; s < sample.size(); ++s) {
      const auto r = row(sample[s]);
      std::copy(r.begin() + j * ds, r.begin() + (j + 1) * ds, slice.begin() + s * ds);
    }
    Rng sub = rng.Fork();
    const KMeansResult km = KMeans(slice, ds, k, options.iterations, sub);
    init_obj += km.objective.front();
    final_obj += km.objective.back();
    float *book = &q.codebooks_[j * k * ds];
    for (std::size_t i = 0; i < k * ds; ++i) book[i] = static_cast<float>(km.centroids[i]);
    // Encode every row against the stored (float) codebook.
    for (std::size_t r = 0; r < rows; ++r) {
      const auto v = row(r);
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        double dd = 0.0;
        for (std::size_t t = 0; t < ds; ++t) {
          const double x = v[j * ds + t] - static_cast<double>(book[c * ds + t]);
          dd += x * x;
        }
        if (dd < best) {
          best = dd;
          arg = c;
        }
      }
      q.codes_[r * m + j] = static_cast<std::uint8_t>(arg);
      sq_err += best;
    }
  }
  if (report) {
    report->initial_objective = init_obj;
    report->final_objective = final_obj;
    report->mean_squared_error = sq_err / static_cast<double>(rows * dim);
  }
  return q;
}

void QuantizedTable::AddRow(std::size_t r, std::vector<double> &acc) const {
  const std::size_t ds = dim_ / m_;
  for (std::size_t j = 0; j < m_; ++j) {
    const float *c = &codebooks_[(j * k_ + codes_[r * m_ + j]) * ds];
    for (std::size_t t = 0; t < ds; ++t) acc[j * ds + t] += static_cast<double>(c[t]);
  }
}

std::vector<double> QuantizedTable::Reconstruct(std::size_t r) const {
  std::vector<double> out(dim_, 0.0);
  AddRow(r, out);
  return out;
}

bool QuantizedTable::Contains(std::string_view word) const {
  return index_.count(std::string(word)) > 0;
}

std::vector<double> QuantizedTable::Lookup(std::string_view word) const {
  if (auto it = index_.find(std::string(word)); it != index_.end())
    return Reconstruct(it->second);
  std::vector<double> out(dim_, 0.0);
  const auto ids = NgramBuckets(word, buckets_);
  if (ids.empty()) return out;
  for (std::size_t b : ids) {
    // Reconstruct each bucket row, then average: same order of operations
    // as the full-precision lookup.
    const std::vector<double> v = Reconstruct(words_.size() + b);
    for (std::size_t i = 0; i < dim_; ++i) out[i] += v[i];
  }
  for (double &v : out) v /= static_cast<double>(ids.size());
  return out;
}

std::string QuantizedTable::Serialize() const {
  namespace b = nn::bytes;
  std::string out(kMagic, 4);
  b::PutU32(out, kVersion);
  b::PutU32(out, static_cast<std::uint32_t>(dim_));
  b::PutU32(out, static_cast<std::uint32_t>(m_));
  b::PutU32(out, static_cast<std::uint32_t>(k_));
  b::PutU64(out, buckets_);
  for (float v : codebooks_) b::PutF32(out, v);
  b::PutU64(out, words_.size());
  for (const auto &w : words_) {
    b::PutU32(out, static_cast<std::uint32_t>(w.size()));
    out += w;
  }
  out.append(reinterpret_cast<const char *>(codes_.data()), codes_.size());
  return out;
}

QuantizedTable QuantizedTable::Deserialize(std::string_view bytes) {
  try {
    nn::bytes::Reader in(bytes);
    if (in.Take(4) != std::string_view(kMagic, 4)) FormatError("not a DLQ8 file");
    if (in.U32() != kVersion) FormatError("unsupported DLQ8 version");
    QuantizedTable q;
    q.dim_ = in.U32();
    q.m_ = in.U32();
    q.k_ = in.U32();
    q.buckets_ = in.U64();
    if (q.m_ == 0 || q.dim_ % q.m_ != 0 || q.k_ == 0 || q.k_ > 256)
      FormatError("inconsistent DLQ8 header");
    q.codebooks_.resize(q.dim_ * q.k_);
    for (float &v : q.codebooks_) v = in.F32();
    const std::uint64_t words = in.U64();
    for (std::uint64_t i = 0; i < words; ++i) {
      const std::uint32_t len = in.U32();
      q.words_.emplace_back(in.Take(len));
      q.index_[q.words_.back()] = i;
    }
    const std::size_t code_len = (q.words_.size() + q.buckets_) * q.m_;
    const std::string_view codes = in.Take(code_len);
    q.codes_.assign(codes.begin(), codes.end());
    if (!in.done()) FormatError("trailing bytes in DLQ8 file");
    for (std::uint8_t c : q.codes_)
      if (c >= q.k_) FormatError("code out of range");
    return q;
  } catch (const nn::NumericsError &e) {
    FormatError(std::string("truncated DLQ8 file: ") + e.what());
  }
}

void QuantizedTable::Save(const std::string &path) const { nn::WriteFile(path, Serialize()); }

QuantizedTable QuantizedTable::Load(const std::string &path) {
  return Deserialize(nn::ReadFile(path));
}

}  // namespace deplima
