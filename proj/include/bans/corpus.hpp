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

#ifndef BANS_CORPUS_HPP_
#define BANS_CORPUS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bans::corpus {

// Cleaning thresholds: shortest article and summary kept in the dataset.
inline constexpr std::size_t kMinArticleWords = 5;
inline constexpr std::size_t kMinSummaryWords = 3;

// One record of a raw (pre-cleaning) dump.
struct RawRecord {
  std::string article_text;
  std::string summary_text;
  std::optional<std::string> source_id;

  bool operator==(const RawRecord&) const = default;
};

// A cleaned article and its reference summary.
struct ArticleSummaryPair {
  std::string article;
  std::string summary;

  bool operator==(const ArticleSummaryPair&) const = default;
};

struct DatasetStats {
  std::size_t total_pairs = 0;
  std::size_t max_article_words = 0;
  std::size_t min_article_words = 0;
  std::size_t max_summary_words = 0;
  std::size_t min_summary_words = 0;

  bool operator==(const DatasetStats&) const = default;
};

struct SplitSpec {
  double train_ratio = 0.7;
  double val_ratio = 0.2;
  double test_ratio = 0.1;
  std::uint64_t seed = 0;

  // Throws bans::Error unless every ratio is in (0,1) and they sum to 1.
  void validate() const;
};

struct DatasetSplit {
  std::vector<ArticleSummaryPair> train;
  std::vector<ArticleSummaryPair> val;
  std::vector<ArticleSummaryPair> test;
};

// True when `text` is well-formed UTF-8.
bool is_valid_utf8(std::string_view text);

// NFC-normalizes, drops URL tokens, Latin letters and control characters,
// collapses whitespace and trims. Idempotent. Throws on invalid UTF-8.
std::string clean_text(std::string_view raw);

// Number of whitespace-delimited words.
std::size_t word_count(std::string_view text);

// True when `pair` satisfies every cleaned-pair invariant (length minima,
// no URLs, no Latin letters, normalized whitespace).
bool is_valid_pair(const ArticleSummaryPair& pair);

// Cleans both fields, drops short/empty pairs and exact duplicates (first
// occurrence wins). Order is otherwise preserved.
std::vector<ArticleSummaryPair> filter_pairs(std::span<const RawRecord> records);

DatasetStats dataset_stats(std::span<const ArticleSummaryPair> pairs);

// Partition sizes for n items: floor(train*n), floor(val*n), remainder.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitSpec& spec);

// Seeded shuffle followed by a train/val/test cut.
DatasetSplit split_dataset(std::span<const ArticleSummaryPair> pairs,
                           const SplitSpec& spec);

// JSON-lines dataset file: {"article": ..., "summary": ...} per line.
std::vector<ArticleSummaryPair> load_dataset(const std::filesystem::path& path);
void save_dataset(std::span<const ArticleSummaryPair> pairs,
                  const std::filesystem::path& path);

// JSON-lines raw dump: {"article_text", "summary_text", ["source_id"]}.
std::vector<RawRecord> load_raw_dump(const std::filesystem::path& path);
void save_raw_dump(std::span<const RawRecord> records,
                   const std::filesystem::path& path);

}  // namespace bans::corpus

#endif  // BANS_CORPUS_HPP_
