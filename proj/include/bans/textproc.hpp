// Copyright 2026 The BANS Authors.
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

#ifndef BANS_TEXTPROC_HPP_
#define BANS_TEXTPROC_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bans/rng.hpp"

namespace bans::text {

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kGoId = 1;
inline constexpr TokenId kEosId = 2;
inline constexpr TokenId kUnkId = 3;
inline constexpr std::size_t kNumSpecials = 4;
inline constexpr std::size_t kDefaultVocabSize = 40000;

inline constexpr std::string_view kPad = "_PAD";
inline constexpr std::string_view kGo = "_GO";
inline constexpr std::string_view kEos = "_EOS";
inline constexpr std::string_view kUnk = "_UNK";

// Splits cleaned text on spaces and detaches the danda and ASCII punctuation
// , . ! ? ; : " ' ( ) - and the em dash into standalone tokens.
std::vector<std::string> tokenize(std::string_view text);

// Joins tokens with single spaces.
std::string join_tokens(std::span<const std::string> tokens);

// Frequency-ranked token <-> id map. Ids 0..3 are the special tokens.
class Vocabulary {
 public:
  // The four specials only.
  Vocabulary();

  // Adopts an explicit id order; validates the specials and uniqueness.
  static Vocabulary from_tokens(std::vector<std::string> id_to_token);

  std::size_t size() const { return id_to_token_.size(); }
  const std::vector<std::string>& tokens() const { return id_to_token_; }

  bool contains(std::string_view token) const;
  // `_UNK` id for out-of-vocabulary tokens.
  TokenId id(std::string_view token) const;
  // Throws bans::Error carrying `id` when out of range.
  const std::string& token(TokenId id) const;

  std::vector<TokenId> encode(std::span<const std::string> tokens) const;
  std::vector<std::string> decode(std::span<const TokenId> ids) const;

  // One token per line; line number is the id.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const {
    return id_to_token_ == other.id_to_token_;
  }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId, Hash, std::equal_to<>> token_to_id_;
};

// Streaming frequency counter behind build_vocab.
class VocabularyBuilder {
 public:
  void add(std::string_view token);
  void add(std::span<const std::string> tokens) {
    for (const auto& t : tokens) add(t);
  }
  // Keeps the max_size - 4 most frequent tokens, ties by first occurrence.
  Vocabulary build(std::size_t max_size) const;

 private:
  struct Entry {
    std::size_t count = 0;
    std::size_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> counts_;
  std::vector<std::string> order_;
};

Vocabulary build_vocab(std::span<const std::string> tokens,
                       std::size_t max_size = kDefaultVocabSize);

struct Bucket {
  std::size_t source_len = 0;
  std::size_t target_len = 0;

  bool operator==(const Bucket&) const = default;
};

// Five (source_len, target_len) shapes, strictly increasing, largest (50, 20).
class BucketSpec {
 public:
  static constexpr std::size_t kNumBuckets = 5;

  BucketSpec();  // [(10,5),(20,8),(30,12),(40,16),(50,20)]
  explicit BucketSpec(std::vector<Bucket> buckets);

  std::size_t size() const { return buckets_.size(); }
  const Bucket& operator[](std::size_t i) const { return buckets_.at(i); }
  const Bucket& largest() const { return buckets_.back(); }
  const std::vector<Bucket>& buckets() const { return buckets_; }

  bool operator==(const BucketSpec&) const = default;

 private:
  std::vector<Bucket> buckets_;
};

struct BucketAssignment {
  std::size_t index = 0;
  bool truncated = false;

  bool operator==(const BucketAssignment&) const = default;
};

// Smallest bucket with src_len <= source_len and tgt_len <= target_len - 2;
// the largest bucket (truncated = true) when none fits.
BucketAssignment assign_bucket(std::size_t src_len, std::size_t tgt_len,
                               const BucketSpec& spec);

struct EncodedPair {
  std::vector<TokenId> source;
  std::vector<TokenId> target;
};

// Time-major grid of values: rows are time steps, columns batch entries.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t steps, std::size_t batch, T fill = T{})
      : steps_(steps), batch_(batch), data_(steps * batch, fill) {}

  std::size_t steps() const { return steps_; }
  std::size_t batch() const { return batch_; }
  T& operator()(std::size_t t, std::size_t b) { return data_[t * batch_ + b]; }
  const T& operator()(std::size_t t, std::size_t b) const { return data_[t * batch_ + b]; }
  std::span<const T> data() const { return data_; }

  std::vector<T> column(std::size_t b) const {
    std::vector<T> out(steps_);
    for (std::size_t t = 0; t < steps_; ++t) out[t] = (*this)(t, b);
    return out;
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t steps_ = 0;
  std::size_t batch_ = 0;
  std::vector<T> data_;
};

struct Batch {
  std::size_t bucket_index = 0;
  Grid<TokenId> encoder_ids;     // source_len x batch
  Grid<TokenId> decoder_ids;     // target_len x batch
  Grid<double> target_weights;   // target_len x batch, 0 or 1

  std::size_t batch_size() const { return encoder_ids.batch(); }
};

// reverse(pad_right(truncate(source, len), len)).
std::vector<TokenId> encoder_column(std::span<const TokenId> source, std::size_t source_len);

// [_GO, t1..tk, _EOS, _PAD...] with the target truncated to target_len - 2.
std::vector<TokenId> decoder_column(std::span<const TokenId> target, std::size_t target_len);

// Builds a batch from the given pairs in order (no sampling).
Batch make_batch(std::span<const EncodedPair* const> pairs, std::size_t bucket_index,
                 const BucketSpec& spec);

// Samples batch_size pairs uniformly (with replacement) from `pool`.
Batch assemble_batch(std::span<const EncodedPair> pool, std::size_t bucket_index,
                     const BucketSpec& spec, std::size_t batch_size, Rng& rng);

// Throws bans::Error describing the first violated Batch invariant.
void validate_batch(const Batch& batch, const BucketSpec& spec);

}  // namespace bans::text

#endif  // BANS_TEXTPROC_HPP_
