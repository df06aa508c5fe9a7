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

#include <filesystem>
#include <fstream>
#include <set>

#include "bans/corpus.hpp"
#include "bans/error.hpp"
#include "doctest.h"
#include "synthetic.hpp"

using namespace bans;
using namespace bans::corpus;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "bans_test_corpus";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string random_text(Rng& rng) {
  static const std::vector<std::string> pieces = {
      "আজকের", "সংবাদ", " ", "  ", "\t", "\n", "Breaking", "news", "https://a.b/c",
      "www.x.org", "http://t.co", "।", ",", "খবর", "\x01", "\x7f", "KelvinK",
      "é", " ", "ক়", "দ্বিতীয়", "১২৩", "-", "(", "\"", "—"};
  std::string s;
  const std::size_t n = rng.below(12);
  for (std::size_t i = 0; i < n; ++i) s += pieces[rng.below(pieces.size())];
  return s;
}

}  // namespace

TEST_CASE("clean_text examples") {
  CHECK(clean_text("দেখুন https://a.b/c আজকের খবর") == "দেখুন আজকের খবর");
  CHECK(clean_text("খবর   Breaking খবর") == "খবর খবর");
  CHECK(clean_text("  \tখবর\nখবর  ") == "খবর খবর");
  CHECK(clean_text("WWW.example.com খবর") == "খবর");
  CHECK(clean_text("খবর\x01।") == "খবর।");
  CHECK(clean_text("") == "");
  CHECK(clean_text("only latin words") == "");
  // Composition-excluded letters come out in canonical (decomposed) form.
  CHECK(clean_text("ড়") == "ড়");
  CHECK_THROWS_AS(clean_text("\xff\xfe"), Error);
}

TEST_CASE("clean_text is idempotent and leaves no garbage") {
  Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    const std::string raw = random_text(rng);
    const std::string once = clean_text(raw);
    CAPTURE(raw);
    CHECK(clean_text(once) == once);
    CHECK(once.find("  ") == std::string::npos);
    CHECK(once.find("http") == std::string::npos);
    if (!once.empty()) {
      CHECK(once.front() != ' ');
      CHECK(once.back() != ' ');
    }
    for (const char c : once) {
      CHECK_FALSE(((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')));
    }
  }
}

TEST_CASE("clean_text never grows normalized text") {
  Rng rng(18);
  for (int i = 0; i < 200; ++i) {
    const std::string normalized = clean_text(random_text(rng));
    const std::string noisy = normalized + " Latin http://x.y\t ";
    CHECK(clean_text(noisy).size() <= noisy.size());
    CHECK(clean_text(noisy) == normalized);
  }
}

TEST_CASE("filter_pairs") {
  const std::vector<RawRecord> raw = {
      {"এক দুই তিন চার", "ক খ গ", std::nullopt},              // 4-word article
      {"এক দুই তিন চার পাঁচ", "ক খ গ", std::nullopt},         // kept, 3-word summary
      {"এক দুই তিন চার পাঁচ", "ক খ", std::nullopt},           // 2-word summary
      {"এক দুই তিন চার পাঁচ", "ক খ গ", std::string("dup")},  // duplicate
      {"Latin only words here now", "ক খ গ", std::nullopt},   // empties out
      {"এক  দুই Spam তিন চার পাঁচ ছয়", "ক খ গ ঘ", std::nullopt},
  };
  const auto pairs = filter_pairs(raw);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == ArticleSummaryPair{"এক দুই তিন চার পাঁচ", "ক খ গ"});
  CHECK(pairs[1] == ArticleSummaryPair{"এক দুই তিন চার পাঁচ ছয়", "ক খ গ ঘ"});
}

TEST_CASE("filter_pairs output always satisfies the pair invariants") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto raw = synthetic::raw_corpus(120, seed);
    Rng rng(seed);
    for (auto& r : raw) {
      if (rng.below(4) == 0) r.summary_text = random_text(rng);
      if (rng.below(6) == 0) r.article_text += random_text(rng);
    }
    raw.push_back(raw.front());
    const auto pairs = filter_pairs(raw);
    REQUIRE_FALSE(pairs.empty());
    for (const auto& p : pairs) CHECK(is_valid_pair(p));
    const auto stats = dataset_stats(pairs);
    CHECK(stats.min_article_words >= kMinArticleWords);
    CHECK(stats.min_summary_words >= kMinSummaryWords);
    std::set<std::pair<std::string, std::string>> unique;
    for (const auto& p : pairs) unique.emplace(p.article, p.summary);
    CHECK(unique.size() == pairs.size());
  }
}

TEST_CASE("dataset_stats") {
  const std::vector<ArticleSummaryPair> pairs = {
      {"১ ২ ৩ ৪ ৫", "ক খ গ"},
      {"১ ২ ৩ ৪ ৫ ৬ ৭ ৮ ৯", "ক খ গ ঘ"},
  };
  const auto s = dataset_stats(pairs);
  CHECK(s == DatasetStats{2, 9, 5, 4, 3});
  CHECK_THROWS_WITH_AS(dataset_stats(std::vector<ArticleSummaryPair>{}), "empty dataset",
                       Error);
}

TEST_CASE("split sizes follow the floor rule") {
  CHECK(split_sizes(19096, SplitSpec{}) == std::array<std::size_t, 3>{13367, 3819, 1910});
  CHECK(split_sizes(10, SplitSpec{}) == std::array<std::size_t, 3>{7, 2, 1});
  for (std::size_t n = 10; n < 2000; n += 37) {
    const auto s = split_sizes(n, SplitSpec{});
    CHECK(s[0] == (n * 7) / 10);
    CHECK(s[1] == (n * 2) / 10);
    CHECK(s[0] + s[1] + s[2] == n);
  }
}

TEST_CASE("split_dataset") {
  std::vector<ArticleSummaryPair> pairs;
  for (int i = 0; i < 50; ++i) {
    pairs.push_back({"নিবন্ধ " + std::to_string(i) + " ক খ গ ঘ", "সার " + std::to_string(i) + " ক"});
  }
  SplitSpec spec;
  spec.seed = 3;
  const auto a = split_dataset(pairs, spec);
  const auto b = split_dataset(pairs, spec);
  CHECK(a.train == b.train);
  CHECK(a.val == b.val);
  CHECK(a.test == b.test);
  CHECK(a.train.size() == 35);
  CHECK(a.val.size() == 10);
  CHECK(a.test.size() == 5);

  std::multiset<std::string> all;
  for (const auto* part : {&a.train, &a.val, &a.test}) {
    for (const auto& p : *part) all.insert(p.article);
  }
  std::multiset<std::string> expected;
  for (const auto& p : pairs) expected.insert(p.article);
  CHECK(all == expected);

  spec.seed = 4;
  CHECK(split_dataset(pairs, spec).train != a.train);

  SplitSpec bad;
  bad.train_ratio = 0.8;
  CHECK_THROWS_AS(split_dataset(pairs, bad), Error);
  CHECK_THROWS_WITH_AS(split_dataset(std::span(pairs).first(3), SplitSpec{}),
                       "split produces empty partition", Error);
}

TEST_CASE("dataset file round trip and errors") {
  const std::vector<ArticleSummaryPair> pairs = {
      {"এক দুই \"উদ্ধৃতি\" তিন চার", "ক, খ গ"},
      {"লাইন\nবিরতি \\ ব্যাকস্ল্যাশ ট্যাব\t পাঁচ", "ক খ গ"},
      {"সাধারণ নিবন্ধ এক দুই তিন", "সার এক দুই"},
  };
  const auto path = temp_file("round_trip.jsonl");
  save_dataset(pairs, path);
  CHECK(load_dataset(path) == pairs);

  {
    std::ofstream out(temp_file("missing.jsonl"));
    out << R"({"article": "ক খ গ ঘ ঙ", "summary": "ক খ গ"})" << '\n';
    out << R"({"article": "ক খ গ ঘ ঙ"})" << '\n';
  }
  CHECK_THROWS_WITH_AS(load_dataset(temp_file("missing.jsonl")),
                       "line 2: missing field \"summary\"", Error);
  {
    std::ofstream out(temp_file("malformed.jsonl"));
    out << R"({"article": "ক", "summary": "খ"})" << '\n' << "{not json" << '\n';
  }
  try {
    load_dataset(temp_file("malformed.jsonl"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).starts_with("line 2: malformed record"));
  }
}

TEST_CASE("raw dump round trip rejects invalid UTF-8") {
  const std::vector<RawRecord> raw = {{"নিবন্ধ", "সার", std::string("id-1")},
                                      {"আরেকটি", "সার", std::nullopt}};
  const auto path = temp_file("raw.jsonl");
  save_raw_dump(raw, path);
  CHECK(load_raw_dump(path) == raw);
  {
    std::ofstream out(temp_file("bad_utf8.jsonl"), std::ios::binary);
    out << "{\"article_text\": \"\xff\xfe\", \"summary_text\": \"x\"}\n";
  }
  CHECK_THROWS_AS(load_raw_dump(temp_file("bad_utf8.jsonl")), Error);
}
