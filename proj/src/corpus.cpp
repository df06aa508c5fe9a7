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

#include "bans/corpus.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <utility>

#include "bans/error.hpp"
#include "bans/rng.hpp"
#include "json.hpp"

namespace bans::corpus {
namespace {

using json = nlohmann::json;

icu::UnicodeString nfc(const icu::UnicodeString& s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("NFC normalizer unavailable");
  icu::UnicodeString out = norm->normalize(s, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  return out;
}

bool is_ascii_letter(UChar32 c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = s[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != prefix[i]) return false;
  }
  return true;
}

bool is_url_token(std::string_view token) {
  return starts_with_ci(token, "http://") || starts_with_ci(token, "https://") ||
         starts_with_ci(token, "www.");
}

std::vector<std::string_view> split_spaces(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) words.push_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

std::string required_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(line_error(line, std::string("missing field \"") + key + "\""));
  }
  if (!it->is_string()) {
    throw Error(line_error(line, std::string("field \"") + key + "\" is not a string"));
  }
  return it->get<std::string>();
}

// Parses every line of a JSON-lines file as an object; `fn(obj, line_no)`.
template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(line_error(line_no, std::string("malformed record: ") + e.what()));
    }
    if (!obj.is_object()) throw Error(line_error(line_no, "malformed record: not an object"));
    fn(obj, line_no);
  }
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

bool is_valid_utf8(std::string_view text) {
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) return false;
  }
  return true;
}

std::string clean_text(std::string_view raw) {
  if (!is_valid_utf8(raw)) throw Error("invalid UTF-8 input");
  const icu::UnicodeString normalized = nfc(icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size()))));

  icu::UnicodeString out;
  icu::UnicodeString token;
  auto flush = [&]() {
    if (token.isEmpty()) return;
    std::string utf8;
    token.toUTF8String(utf8);
    if (!is_url_token(utf8)) {
      icu::UnicodeString kept;
      for (int32_t i = 0; i < token.length(); i = token.moveIndex32(i, 1)) {
        const UChar32 c = token.char32At(i);
        if (is_ascii_letter(c) || u_charType(c) == U_CONTROL_CHAR) continue;
        kept.append(c);
      }
      if (!kept.isEmpty()) {
        if (!out.isEmpty()) out.append(static_cast<UChar32>(' '));
        out.append(kept);
      }
    }
    token.remove();
  };
  for (int32_t i = 0; i < normalized.length(); i = normalized.moveIndex32(i, 1)) {
    const UChar32 c = normalized.char32At(i);
    if (u_isUWhiteSpace(c)) {
      flush();
    } else {
      token.append(c);
    }
  }
  flush();

  std::string result;
  nfc(out).toUTF8String(result);
  return result;
}

std::size_t word_count(std::string_view text) { return split_spaces(text).size(); }

bool is_valid_pair(const ArticleSummaryPair& pair) {
  auto clean_field = [](const std::string& s) {
    if (s.empty() || s.front() == ' ' || s.back() == ' ') return false;
    if (s.find("  ") != std::string::npos) return false;
    for (const char c : s) {
      if (is_ascii_letter(static_cast<unsigned char>(c))) return false;
      if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) return false;
    }
    for (auto w : split_spaces(s)) {
      if (is_url_token(w)) return false;
    }
    return is_valid_utf8(s);
  };
  return clean_field(pair.article) && clean_field(pair.summary) &&
         word_count(pair.article) >= kMinArticleWords &&
         word_count(pair.summary) >= kMinSummaryWords;
}

std::vector<ArticleSummaryPair> filter_pairs(std::span<const RawRecord> records) {
  std::vector<ArticleSummaryPair> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : records) {
    ArticleSummaryPair p{clean_text(r.article_text), clean_text(r.summary_text)};
    if (p.article.empty() || p.summary.empty()) continue;
    if (word_count(p.article) < kMinArticleWords) continue;
    if (word_count(p.summary) < kMinSummaryWords) continue;
    if (!seen.emplace(p.article, p.summary).second) continue;
    out.push_back(std::move(p));
  }
  return out;
}

DatasetStats dataset_stats(std::span<const ArticleSummaryPair> pairs) {
  if (pairs.empty()) throw Error("empty dataset");
  DatasetStats s;
  s.total_pairs = pairs.size();
  s.min_article_words = s.min_summary_words = SIZE_MAX;
  for (const auto& p : pairs) {
    const std::size_t a = word_count(p.article);
    const std::size_t b = word_count(p.summary);
    s.max_article_words = std::max(s.max_article_words, a);
    s.min_article_words = std::min(s.min_article_words, a);
    s.max_summary_words = std::max(s.max_summary_words, b);
    s.min_summary_words = std::min(s.min_summary_words, b);
  }
  return s;
}

void SplitSpec::validate() const {
  for (const double r : {train_ratio, val_ratio, test_ratio}) {
    if (!(r > 0.0 && r < 1.0)) throw Error("split ratios must lie in (0,1)");
  }
  if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-12) {
    throw Error("split ratios must sum to 1");
  }
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  // The small epsilon keeps products such as 0.7 * 10 from flooring to 6.
  const auto cut = [n](double ratio) {
    return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  };
  const std::size_t train = cut(spec.train_ratio);
  const std::size_t val = std::min(cut(spec.val_ratio), n - train);
  return {train, val, n - train - val};
}

DatasetSplit split_dataset(std::span<const ArticleSummaryPair> pairs,
                           const SplitSpec& spec) {
  if (pairs.empty()) throw Error("empty dataset");
  const auto sizes = split_sizes(pairs.size(), spec);
  if (sizes[0] == 0 || sizes[1] == 0 || sizes[2] == 0) {
    throw Error("split produces empty partition");
  }
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(spec.seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  DatasetSplit out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto& dst = k < sizes[0] ? out.train : (k < sizes[0] + sizes[1] ? out.val : out.test);
    dst.push_back(pairs[order[k]]);
  }
  return out;
}

std::vector<ArticleSummaryPair> load_dataset(const std::filesystem::path& path) {
  std::vector<ArticleSummaryPair> out;
  for_each_json_line(path, [&](const json& obj, std::size_t line) {
    ArticleSummaryPair p;
    p.article = required_string(obj, "article", line);
    p.summary = required_string(obj, "summary", line);
    if (obj.size() != 2) throw Error(line_error(line, "unexpected extra fields"));
    out.push_back(std::move(p));
  });
  return out;
}

void save_dataset(std::span<const ArticleSummaryPair> pairs,
                  const std::filesystem::path& path) {
  std::vector<std::string> lines;
  lines.reserve(pairs.size());
  for (const auto& p : pairs) {
    json obj = json::object();
    obj["article"] = p.article;
    obj["summary"] = p.summary;
    lines.push_back(obj.dump());
  }
  write_lines(path, lines);
}

std::vector<RawRecord> load_raw_dump(const std::filesystem::path& path) {
  std::vector<RawRecord> out;
  for_each_json_line(path, [&](const json& obj, std::size_t line) {
    RawRecord r;
    r.article_text = required_string(obj, "article_text", line);
    r.summary_text = required_string(obj, "summary_text", line);
    if (obj.contains("source_id")) r.source_id = required_string(obj, "source_id", line);
    out.push_back(std::move(r));
  });
  return out;
}

void save_raw_dump(std::span<const RawRecord> records, const std::filesystem::path& path) {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const auto& r : records) {
    json obj = json::object();
    obj["article_text"] = r.article_text;
    obj["summary_text"] = r.summary_text;
    if (r.source_id) obj["source_id"] = *r.source_id;
    lines.push_back(obj.dump());
  }
  write_lines(path, lines);
}

}  // namespace bans::corpus
