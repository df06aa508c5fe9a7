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

#ifndef BANS_METRICS_HPP_
#define BANS_METRICS_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace bans::metrics {

using Tokens = std::span<const std::string>;

struct ScoreTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static ScoreTriple from(double precision, double recall);
  bool operator==(const ScoreTriple&) const = default;
};

// Clipped n-gram overlap.
ScoreTriple rouge_n(Tokens candidate, Tokens reference, std::size_t n);
// Longest-common-subsequence overlap.
ScoreTriple rouge_l(Tokens candidate, Tokens reference);
std::size_t lcs_length(Tokens a, Tokens b);

// Sentence BLEU with N = min(max_n, |candidate|), add-one smoothing for
// n >= 2 and the usual brevity penalty.
double bleu(Tokens candidate, Tokens reference, std::size_t max_n = 4);

struct ExampleScores {
  ScoreTriple rouge1;
  ScoreTriple rougeL;
  double bleu = 0.0;
};

struct EvalReport {
  std::size_t n_examples = 0;
  ScoreTriple rouge1;  // macro averages
  ScoreTriple rougeL;
  double bleu = 0.0;
  std::vector<ExampleScores> rows;
};

EvalReport evaluate_corpus(std::span<const std::vector<std::string>> candidates,
                           std::span<const std::vector<std::string>> references);

// Tab-separated report: a '#' header line, one row per example
//   index r1_p r1_r r1_f rl_p rl_r rl_f bleu
// and a final row whose index column is "mean".
void write_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport read_report(const std::filesystem::path& path);

}  // namespace bans::metrics

#endif  // BANS_METRICS_HPP_
