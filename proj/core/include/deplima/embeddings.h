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

#ifndef DEPLIMA_EMBEDDINGS_H_
#define DEPLIMA_EMBEDDINGS_H_

// Pretrained word vectors with subword composition for unknown words, and
// a product-quantized store of the same table.
//
// A word w is wrapped as "<w>"; its character n-grams (n = 3..6, counted in
// code points) hash with 64-bit FNV-1a into one of B buckets. Unknown
// words get the mean of their bucket vectors.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "deplima/error.h"

namespace deplima {

class Rng;

enum class EmbeddingErrc {
  kBadFormat,
  kBadSubquantizerCount,
  kDimMismatch,
  kEmptyTable,
};
using EmbeddingError = KindedError<EmbeddingErrc>;

std::uint64_t Fnv1a64(std::string_view bytes);

// The n-grams of "<word>" for n in [min_n, max_n], in order of start then
// length.
std::vector<std::string> CharNgrams(std::string_view word, std::size_t min_n = 3,
                                    std::size_t max_n = 6);
std::vector<std::size_t> NgramBuckets(std::string_view word, std::size_t buckets);

class WordVectors {
 public:
  virtual ~WordVectors() = default;
  virtual std::size_t dim() const = 0;
  virtual bool Contains(std::string_view word) const = 0;
  virtual std::vector<double> Lookup(std::string_view word) const = 0;
};

// Values are held at float32 precision (rounded on insertion), the
// precision of the quantized codebooks.
class SubwordTable : public WordVectors {
 public:
  static constexpr std::size_t kDefaultBuckets = 2000000;

  SubwordTable(std::size_t dim, std::size_t buckets);

  // "rows dim" header, then "word v1 ... v_dim" per line. Each bucket is
  // set to the mean vector of the words having an n-gram in it (zero when
  // none does).
  static SubwordTable FromText(std::string_view text, std::size_t buckets);
  std::string ToText() const;

  // Adds or replaces a word vector.
  void SetWord(const std::string &word, std::span<const double> vec);
  std::span<double> MutableBucket(std::size_t b);
  // Recomputes every bucket from the current word vectors.
  void DeriveBuckets();

  std::size_t dim() const override { return dim_; }
  std::size_t buckets() const { return buckets_; }
  std::size_t word_count() const { return words_.size(); }
  const std::vector<std::string> &words() const { return words_; }
  std::span<const double> WordRow(std::size_t i) const;
  std::span<const double> BucketRow(std::size_t b) const;

  bool Contains(std::string_view word) const override;
  std::vector<double> Lookup(std::string_view word) const override;

 private:
  std::size_t dim_;
  std::size_t buckets_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> word_values_;
  std::vector<double> bucket_values_;
};

struct KMeansResult {
  std::vector<double> centroids;        // k x d
  std::vector<std::uint32_t> assignment;  // per point
  std::vector<double> objective;        // after init, then after each iteration
};

// Lloyd's algorithm from a k-means++ start, fixed iteration count. `points`
// is n x d row-major. When fewer than k distinct points exist the spare
// centroids repeat chosen ones. A centroid is its first member plus the
// mean deviation of the members from it, so identical members reproduce
// their value exactly. Throws if the objective ever increases.
KMeansResult KMeans(std::span<const double> points, std::size_t d, std::size_t k,
                    std::size_t iterations, Rng &rng);

struct QuantizeOptions {
  std::size_t subquantizers = 0;  // m; 0 means dim / 2
  std::size_t codebook_size = 256;
  std::size_t iterations = 25;
  // Codebooks are trained on at most this many sampled rows per subspace
  // (all rows when there are fewer); every row is then encoded.
  std::size_t max_training_rows = 65536;
  std::uint64_t seed = 1;
};

struct QuantizeReport {
  double initial_objective = 0.0;  // summed over subspaces, after init
  double final_objective = 0.0;
  double mean_squared_error = 0.0;  // per row, per coordinate
};

class QuantizedTable : public WordVectors {
 public:
  // Quantizes word rows and bucket rows alike.
  static QuantizedTable Quantize(const SubwordTable &table, const QuantizeOptions &options,
                                 QuantizeReport *report = nullptr);

  // "DLQ8" | u32 version | u32 dim | u32 m | u32 k | u64 buckets |
  // f32 codebooks [m][k][dim/m] | u64 words | (u32 len, bytes)* |
  // u8 codes [(words + buckets) x m]
  std::string Serialize() const;
  static QuantizedTable Deserialize(std::string_view bytes);
  void Save(const std::string &path) const;
  static QuantizedTable Load(const std::string &path);

  std::size_t dim() const override { return dim_; }
  std::size_t subquantizers() const { return m_; }
  std::size_t codebook_size() const { return k_; }
  std::size_t buckets() const { return buckets_; }
  std::size_t word_count() const { return words_.size(); }
  std::size_t rows() const { return words_.size() + buckets_; }

  // Storage accounting: codes are rows * m bytes against rows * dim * 4
  // for float32 rows; codebooks are counted separately.
  std::size_t code_bytes() const { return codes_.size(); }
  std::size_t float32_bytes() const { return rows() * dim_ * 4; }
  std::size_t codebook_bytes() const { return codebooks_.size() * 4; }

  // Row r in [0, rows()): words first, then buckets.
  std::vector<double> Reconstruct(std::size_t row) const;

  bool Contains(std::string_view word) const override;
  std::vector<double> Lookup(std::string_view word) const override;

 private:
  QuantizedTable() = default;
  void AddRow(std::size_t row, std::vector<double> &acc) const;

  std::size_t dim_ = 0;
  std::size_t m_ = 0;
  std::size_t k_ = 0;
  std::size_t buckets_ = 0;
  std::vector<float> codebooks_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::uint8_t> codes_;
};

}  // namespace deplima

#endif  // DEPLIMA_EMBEDDINGS_H_
