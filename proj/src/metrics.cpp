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

#include "bans/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "bans/error.hpp"

namespace bans::metrics {
namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(Tokens tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<long>(i),
                                      tokens.begin() + static_cast<long>(i + n))];
  }
  return counts;
}

std::size_t clipped_matches(const NgramCounts& cand, const NgramCounts& ref) {
  std::size_t match = 0;
  for (const auto& [gram, c] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) match += std::min(c, it->second);
  }
  return match;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

ScoreTriple ScoreTriple::from(double p, double r) {
  return {p, r, p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0};
}

ScoreTriple rouge_n(Tokens candidate, Tokens reference, std::size_t n) {
  if (n == 0) throw Error("rouge_n requires n >= 1");
  const std::size_t cand_total = candidate.size() >= n ? candidate.size() - n + 1 : 0;
  const std::size_t ref_total = reference.size() >= n ? reference.size() - n + 1 : 0;
  const std::size_t match =
      clipped_matches(count_ngrams(candidate, n), count_ngrams(reference, n));
  return ScoreTriple::from(ratio(match, cand_total), ratio(match, ref_total));
}

std::size_t lcs_length(Tokens a, Tokens b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

ScoreTriple rouge_l(Tokens candidate, Tokens reference) {
  const std::size_t l = lcs_length(candidate, reference);
  return ScoreTriple::from(ratio(l, candidate.size()), ratio(l, reference.size()));
}

double bleu(Tokens candidate, Tokens reference, std::size_t max_n) {
  if (max_n == 0) throw Error("bleu requires max_n >= 1");
  if (candidate.empty()) return 0.0;
  const std::size_t order = std::min(max_n, candidate.size());
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= order; ++n) {
    const std::size_t total = candidate.size() - n + 1;
    const std::size_t match =
        clipped_matches(count_ngrams(candidate, n), count_ngrams(reference, n));
    if (n == 1) {
      if (match == 0) return 0.0;
      log_sum += std::log(static_cast<double>(match) / static_cast<double>(total));
    } else {
      log_sum += std::log(static_cast<double>(match + 1) / static_cast<double>(total + 1));
    }
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / static_cast<double>(order));
}

EvalReport evaluate_corpus(std::span<const std::vector<std::string>> candidates,
                           std::span<const std::vector<std::string>> references) {
  if (candidates.size() != references.size()) {
    throw Error("candidate/reference count mismatch: " + std::to_string(candidates.size()) +
                " vs " + std::to_string(references.size()));
  }
  if (candidates.empty()) throw Error("no examples to evaluate");
  EvalReport report;
  report.n_examples = candidates.size();
  double sums[7] = {};
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    ExampleScores row;
    row.rouge1 = rouge_n(candidates[i], references[i], 1);
    row.rougeL = rouge_l(candidates[i], references[i]);
    row.bleu = bleu(candidates[i], references[i]);
    const double vals[7] = {row.rouge1.precision, row.rouge1.recall, row.rouge1.f1,
                            row.rougeL.precision, row.rougeL.recall, row.rougeL.f1, row.bleu};
    for (int k = 0; k < 7; ++k) sums[k] += vals[k];
    report.rows.push_back(row);
  }
  const double n = static_cast<double>(candidates.size());
  report.rouge1 = {sums[0] / n, sums[1] / n, sums[2] / n};
  report.rougeL = {sums[3] / n, sums[4] / n, sums[5] / n};
  report.bleu = sums[6] / n;
  return report;
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "#index\trouge1_p\trouge1_r\trouge1_f\trougeL_p\trougeL_r\trougeL_f\tbleu\n";
  auto line = [&](const std::string& idx, const ScoreTriple& r1, const ScoreTriple& rl,
                  double b) {
    out << idx << '\t' << fmt(r1.precision) << '\t' << fmt(r1.recall) << '\t' << fmt(r1.f1)
        << '\t' << fmt(rl.precision) << '\t' << fmt(rl.recall) << '\t' << fmt(rl.f1) << '\t'
        << fmt(b) << '\n';
  };
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    line(std::to_string(i), r.rouge1, r.rougeL, r.bleu);
  }
  line("mean", report.rouge1, report.rougeL, report.bleu);
  if (!out) throw Error("write failed: " + path.string());
}

EvalReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  EvalReport report;
  std::string line;
  bool have_mean = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (have_mean) throw Error("report line " + std::to_string(line_no) + ": row after mean");
    std::stringstream ss(line);
    std::string idx;
    std::getline(ss, idx, '\t');
    double v[7];
    for (double& x : v) {
      std::string cell;
      if (!std::getline(ss, cell, '\t')) {
        throw Error("report line " + std::to_string(line_no) + ": missing column");
      }
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), x);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw Error("report line " + std::to_string(line_no) + ": bad number");
      }
    }
    ExampleScores row{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, v[6]};
    if (idx == "mean") {
      have_mean = true;
      report.rouge1 = row.rouge1;
      report.rougeL = row.rougeL;
      report.bleu = row.bleu;
    } else {
      if (idx != std::to_string(report.rows.size())) {
        throw Error("report line " + std::to_string(line_no) + ": unexpected index");
      }
      report.rows.push_back(row);
    }
  }
  if (!have_mean) throw Error("report has no mean row");
  report.n_examples = report.rows.size();
  return report;
}

}  // namespace bans::metrics
