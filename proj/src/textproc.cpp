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

#include "bans/textproc.hpp"

#include <algorithm>
#include <fstream>

#include "bans/error.hpp"

namespace bans::text {
namespace {

constexpr std::string_view kDanda = "\xE0\xA5\xA4";   // U+0964
constexpr std::string_view kEmDash = "\xE2\x80\x94";  // U+2014
constexpr std::string_view kAsciiPunct = ",.!?;:\"'()-";

bool is_special(std::string_view t) {
  return t == kPad || t == kGo || t == kEos || t == kUnk;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&]() {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      flush();
      ++i;
    } else if (kAsciiPunct.find(c) != std::string_view::npos) {
      flush();
      out.emplace_back(1, c);
      ++i;
    } else if (text.substr(i, kDanda.size()) == kDanda) {
      flush();
      out.emplace_back(kDanda);
      i += kDanda.size();
    } else if (text.substr(i, kEmDash.size()) == kEmDash) {
      flush();
      out.emplace_back(kEmDash);
      i += kEmDash.size();
    } else {
      current.push_back(c);
      ++i;
    }
  }
  flush();
  return out;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

Vocabulary::Vocabulary() {
  for (const auto t : {kPad, kGo, kEos, kUnk}) {
    token_to_id_.emplace(std::string(t), static_cast<TokenId>(id_to_token_.size()));
    id_to_token_.emplace_back(t);
  }
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> id_to_token) {
  if (id_to_token.size() < kNumSpecials || id_to_token[0] != kPad ||
      id_to_token[1] != kGo || id_to_token[2] != kEos || id_to_token[3] != kUnk) {
    throw Error("vocabulary must start with _PAD, _GO, _EOS, _UNK");
  }
  Vocabulary v;
  v.id_to_token_.clear();
  v.token_to_id_.clear();
  v.token_to_id_.reserve(id_to_token.size());
  for (std::size_t i = 0; i < id_to_token.size(); ++i) {
    const auto& t = id_to_token[i];
    if (t.empty() || t.find_first_of(" \t\r\n") != std::string::npos) {
      throw Error("invalid vocabulary token at id " + std::to_string(i));
    }
    if (!v.token_to_id_.emplace(t, static_cast<TokenId>(i)).second) {
      throw Error("duplicate vocabulary token \"" + t + "\"");
    }
  }
  v.id_to_token_ = std::move(id_to_token);
  return v;
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_id_.find(token) != token_to_id_.end();
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw Error("token id out of range: " + std::to_string(id));
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocabulary::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (const TokenId i : ids) out.push_back(token(i));
  return out;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& t : id_to_token_) out << t << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return from_tokens(std::move(tokens));
}

void VocabularyBuilder::add(std::string_view token) {
  if (token.empty() || is_special(token)) return;
  auto [it, inserted] = counts_.try_emplace(std::string(token));
  if (inserted) {
    it->second.first_seen = order_.size();
    order_.push_back(it->first);
  }
  ++it->second.count;
}

Vocabulary VocabularyBuilder::build(std::size_t max_size) const {
  if (max_size < kNumSpecials + 1) throw Error("vocabulary max_size must be >= 5");
  std::vector<const std::string*> ranked;
  ranked.reserve(order_.size());
  for (const auto& t : order_) ranked.push_back(&t);
  std::stable_sort(ranked.begin(), ranked.end(), [&](const auto* a, const auto* b) {
    return counts_.at(*a).count > counts_.at(*b).count;
  });
  std::vector<std::string> tokens = {std::string(kPad), std::string(kGo),
                                     std::string(kEos), std::string(kUnk)};
  const std::size_t keep = std::min(ranked.size(), max_size - kNumSpecials);
  for (std::size_t i = 0; i < keep; ++i) tokens.push_back(*ranked[i]);
  return Vocabulary::from_tokens(std::move(tokens));
}

Vocabulary build_vocab(std::span<const std::string> tokens, std::size_t max_size) {
  VocabularyBuilder b;
  b.add(tokens);
  return b.build(max_size);
}

BucketSpec::BucketSpec()
    : BucketSpec(std::vector<Bucket>{{10, 5}, {20, 8}, {30, 12}, {40, 16}, {50, 20}}) {}

BucketSpec::BucketSpec(std::vector<Bucket> buckets) : buckets_(std::move(buckets)) {
  if (buckets_.size() != kNumBuckets) throw Error("bucket spec must have exactly 5 buckets");
  for (std::size_t i = 0; i < buckets_.size(); ++i) {
    if (buckets_[i].target_len < 2) throw Error("bucket target_len must be >= 2");
    if (buckets_[i].source_len < 1) throw Error("bucket source_len must be >= 1");
    if (i > 0 && (buckets_[i].source_len <= buckets_[i - 1].source_len ||
                  buckets_[i].target_len <= buckets_[i - 1].target_len)) {
      throw Error("bucket sizes must be strictly increasing");
    }
  }
  if (buckets_.back() != Bucket{50, 20}) throw Error("largest bucket must be (50, 20)");
}

BucketAssignment assign_bucket(std::size_t src_len, std::size_t tgt_len,
                               const BucketSpec& spec) {
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (src_len <= spec[i].source_len && tgt_len + 2 <= spec[i].target_len) {
      return {i, false};
    }
  }
  return {spec.size() - 1, true};
}

std::vector<TokenId> encoder_column(std::span<const TokenId> source, std::size_t source_len) {
  std::vector<TokenId> col(source_len, kPadId);
  const std::size_t n = std::min(source.size(), source_len);
  std::copy_n(source.begin(), n, col.begin());
  std::reverse(col.begin(), col.end());
  return col;
}

std::vector<TokenId> decoder_column(std::span<const TokenId> target, std::size_t target_len) {
  std::vector<TokenId> col(target_len, kPadId);
  const std::size_t n = std::min(target.size(), target_len - 2);
  col[0] = kGoId;
  std::copy_n(target.begin(), n, col.begin() + 1);
  col[n + 1] = kEosId;
  return col;
}

Batch make_batch(std::span<const EncodedPair* const> pairs, std::size_t bucket_index,
                 const BucketSpec& spec) {
  if (pairs.empty()) throw Error("cannot build an empty batch");
  const Bucket& bucket = spec[bucket_index];
  Batch batch;
  batch.bucket_index = bucket_index;
  batch.encoder_ids = Grid<TokenId>(bucket.source_len, pairs.size(), kPadId);
  batch.decoder_ids = Grid<TokenId>(bucket.target_len, pairs.size(), kPadId);
  batch.target_weights = Grid<double>(bucket.target_len, pairs.size(), 0.0);
  for (std::size_t b = 0; b < pairs.size(); ++b) {
    const auto enc = encoder_column(pairs[b]->source, bucket.source_len);
    const auto dec = decoder_column(pairs[b]->target, bucket.target_len);
    for (std::size_t t = 0; t < bucket.source_len; ++t) batch.encoder_ids(t, b) = enc[t];
    for (std::size_t t = 0; t < bucket.target_len; ++t) {
      batch.decoder_ids(t, b) = dec[t];
      const TokenId next = t + 1 < bucket.target_len ? dec[t + 1] : kPadId;
      batch.target_weights(t, b) = next == kPadId ? 0.0 : 1.0;
    }
  }
  return batch;
}

Batch assemble_batch(std::span<const EncodedPair> pool, std::size_t bucket_index,
                     const BucketSpec& spec, std::size_t batch_size, Rng& rng) {
  if (pool.empty()) throw Error("empty bucket pool");
  if (batch_size == 0) throw Error("batch_size must be >= 1");
  std::vector<const EncodedPair*> chosen(batch_size);
  for (auto& p : chosen) p = &pool[rng.below(pool.size())];
  return make_batch(chosen, bucket_index, spec);
}

void validate_batch(const Batch& batch, const BucketSpec& spec) {
  if (batch.bucket_index >= spec.size()) throw Error("batch: bucket index out of range");
  const Bucket& bucket = spec[batch.bucket_index];
  const std::size_t n = batch.encoder_ids.batch();
  if (n == 0) throw Error("batch: empty");
  if (batch.encoder_ids.steps() != bucket.source_len) throw Error("batch: encoder length");
  if (batch.decoder_ids.steps() != bucket.target_len ||
      batch.target_weights.steps() != bucket.target_len) {
    throw Error("batch: decoder length");
  }
  if (batch.decoder_ids.batch() != n || batch.target_weights.batch() != n) {
    throw Error("batch: column count mismatch");
  }
  for (std::size_t b = 0; b < n; ++b) {
    bool in_prefix = true;
    for (std::size_t t = 0; t < bucket.source_len; ++t) {
      const TokenId id = batch.encoder_ids(t, b);
      if (id < 0) throw Error("batch: negative id");
      if (id == kPadId && !in_prefix) throw Error("batch: encoder _PAD outside prefix");
      if (id != kPadId) in_prefix = false;
    }
    if (batch.decoder_ids(0, b) != kGoId) throw Error("batch: decoder must start with _GO");
    std::size_t eos = 0;
    for (std::size_t t = 1; t < bucket.target_len; ++t) {
      const TokenId id = batch.decoder_ids(t, b);
      if (id == kEosId) {
        eos = t;
        break;
      }
      if (id == kPadId || id == kGoId || id < 0) throw Error("batch: bad decoder token");
    }
    if (eos == 0) throw Error("batch: missing _EOS");
    for (std::size_t t = eos + 1; t < bucket.target_len; ++t) {
      if (batch.decoder_ids(t, b) != kPadId) throw Error("batch: non-_PAD after _EOS");
    }
    for (std::size_t t = 0; t < bucket.target_len; ++t) {
      const TokenId next = t + 1 < bucket.target_len ? batch.decoder_ids(t + 1, b) : kPadId;
      const double expected = next == kPadId ? 0.0 : 1.0;
      if (batch.target_weights(t, b) != expected) throw Error("batch: target weight mask");
    }
  }
}

}  // namespace bans::text
