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


#include <cmath>
#include <filesystem>

#include "bans/error.hpp"
#include "bans/seq2seq.hpp"
#include "doctest.h"
#include "synthetic.hpp"

using namespace bans;
using namespace bans::model;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "bans_test_seq2seq" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

bool same_values(const ModelParams& a, const ModelParams& b) {
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (!(ta[i]->value == tb[i]->value)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("parameter count follows the layer shapes") {
  const auto cfg = synthetic::desk_config();
  const auto p = build_model(cfg, 1);
  const std::size_t V = 50, D = 16, H = 32;
  const std::size_t expected = V * D + (4 * H * D + 4 * H * H + 4 * H) +
                               (4 * H * (D + H) + 4 * H * H + 4 * H) + (H * 2 * H + H) +
                               (V * H + V);
  CHECK(p.parameter_count() == expected);
  CHECK(p.parameter_count() == 21170);
}

TEST_CASE("initialization is seeded and sets the forget bias") {
  const auto cfg = synthetic::desk_config();
  const auto a = build_model(cfg, 3);
  const auto b = build_model(cfg, 3);
  const auto c = build_model(cfg, 4);
  CHECK(same_values(a, b));
  CHECK_FALSE(same_values(a, c));
  const std::size_t H = cfg.hidden_dim;
  for (std::size_t j = 0; j < 4 * H; ++j) {
    const double bias = a.encoder.b.value(0, j);
    if (j >= H && j < 2 * H) {
      CHECK(bias == 1.0);
    } else {
      CHECK(std::abs(bias) <= 0.08);
    }
  }
  for (const auto* t : a.tensors()) {
    if (t->name == "encoder.b" || t->name == "decoder.b") continue;
    for (const double v : t->value.data()) CHECK(std::abs(v) <= 0.08);
  }
}

TEST_CASE("config validation and key round trip") {
  ModelConfig c;
  CHECK_NOTHROW(c.validate());
  ModelConfig d;
  d.apply(synthetic::desk_config().to_map());
  CHECK(d == synthetic::desk_config());
  CHECK_THROWS_AS(c.apply({{"no_such_key", "1"}}), Error);
  c.num_layers = 2;
  CHECK_THROWS_AS(c.validate(), Error);
  c = ModelConfig{};
  c.max_grad_norm = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(format_buckets(text::BucketSpec{}) == "10:5,20:8,30:12,40:16,50:20");
  CHECK(parse_buckets(format_buckets(text::BucketSpec{})) == text::BucketSpec{});
  CHECK_THROWS_AS(parse_buckets("10:5,20:8"), Error);
}

TEST_CASE("loss only counts weighted decoder positions") {
  const auto cfg = synthetic::desk_config();
  const auto params = build_model(cfg, 1);
  text::EncodedPair p{{5, 6, 7}, {9}};
  const text::EncodedPair* ptr = &p;
  const auto batch = text::make_batch({&ptr, 1}, 0, cfg.buckets);
  double weight = 0.0;
  for (const double w : batch.target_weights.data()) weight += w;
  CHECK(weight == 2.0);  // t1 and _EOS

  const auto fwd = forward_batch(batch, params, cfg);
  CHECK(fwd.logits.rows() == 5);
  CHECK(fwd.logits.cols() == 50);
  // Recompute the mean from the returned logits: next-token targets are t1
  // then _EOS at steps 0 and 1.
  auto nll = [&](std::size_t row, std::size_t target) {
    double m = -1e300;
    for (std::size_t v = 0; v < 50; ++v) m = std::max(m, fwd.logits(row, v));
    double z = 0.0;
    for (std::size_t v = 0; v < 50; ++v) z += std::exp(fwd.logits(row, v) - m);
    return -(fwd.logits(row, target) - m - std::log(z));
  };
  const double expected = (nll(0, 9) + nll(1, text::kEosId)) / 2.0;
  CHECK(fwd.loss == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(fwd.loss - std::log(50.0)) < 0.1);
}

TEST_CASE("full model gradients match central differences") {
  const auto cfg = synthetic::desk_config();
  for (std::uint64_t seed : {1, 2}) {
    auto params = synthetic::spread_model(cfg, 0.5, seed);
    const auto batch = synthetic::micro_batch(cfg, 10 + seed);
    params.zero_grad();
    backward_batch(forward_batch(batch, params, cfg), params);
    auto tensors = params.tensors();
    const auto report = nn::gradient_check(
        [&] { return forward_batch(batch, params, cfg).loss; }, tensors,
        {.epsilon = 1e-5, .samples_per_tensor = 40, .seed = seed});
    for (const auto& [name, err] : report.per_tensor) {
      INFO(name);
      CHECK(err < 1e-4);
    }
  }
}

TEST_CASE("gradients at default init agree to finite-difference resolution") {
  // Exhaustive over every entry. Entries below 1e-6 sit under the central
  // difference noise floor and are compared in absolute terms instead.
  const auto cfg = synthetic::desk_config();
  auto params = build_model(cfg, 5);
  const auto batch = synthetic::micro_batch(cfg, 21);
  params.zero_grad();
  backward_batch(forward_batch(batch, params, cfg), params);
  double worst_rel = 0.0, worst_abs = 0.0;
  for (auto* t : params.tensors()) {
    auto values = t->value.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + 1e-5;
      const double up = forward_batch(batch, params, cfg).loss;
      values[i] = saved - 1e-5;
      const double down = forward_batch(batch, params, cfg).loss;
      values[i] = saved;
      const double numeric = (up - down) / 2e-5;
      const double analytic = t->grad.data()[i];
      if (std::max(std::abs(analytic), std::abs(numeric)) >= 1e-6) {
        worst_rel = std::max(worst_rel, nn::relative_error(analytic, numeric));
      } else {
        worst_abs = std::max(worst_abs, std::abs(analytic - numeric));
      }
    }
  }
  CHECK(worst_rel < 1e-4);
  CHECK(worst_abs < 1e-9);
}

TEST_CASE("train_step with zero learning rate leaves weights alone") {
  const auto cfg = synthetic::desk_config();
  auto params = build_model(cfg, 1);
  const auto before = params;
  const auto batch = synthetic::micro_batch(cfg, 3);
  train_step(batch, params, cfg, 0.0);
  CHECK(same_values(params, before));
  for (const auto* t : params.tensors()) {
    for (const double g : t->grad.data()) CHECK(g == 0.0);
  }
}

TEST_CASE("training reduces the loss on a fixed batch") {
  const auto cfg = synthetic::desk_config();
  auto params = build_model(cfg, 1);
  const auto batch = synthetic::micro_batch(cfg, 3);
  const double first = train_step(batch, params, cfg, cfg.learning_rate);
  double last = first;
  for (int i = 0; i < 50; ++i) last = train_step(batch, params, cfg, cfg.learning_rate);
  CHECK(last < first);
}

TEST_CASE("non-finite loss aborts before the update") {
  const auto cfg = synthetic::desk_config();
  auto params = build_model(cfg, 1);
  params.output_b.value(0, 4) = std::numeric_limits<double>::quiet_NaN();
  const auto before = params;
  const auto batch = synthetic::micro_batch(cfg, 3);
  CHECK_THROWS_AS(train_step(batch, params, cfg, 0.5), Error);
  CHECK(params.embedding.value == before.embedding.value);
}

TEST_CASE("greedy decoding respects the bucket cap") {
  const auto cfg = synthetic::desk_config();
  auto params = build_model(cfg, 1);
  // Make _EOS unreachable so decoding runs to the cap.
  params.output_b.value(0, text::kEosId) = -1e6;
  params.output_b.value(0, 7) = 100.0;
  const std::vector<text::TokenId> shortsrc{5, 6, 7};
  const auto out = greedy_decode(shortsrc, params, cfg);
  CHECK(out.size() == 3);  // bucket (10, 5)
  for (const auto id : out) CHECK(id == 7);
  std::vector<text::TokenId> longsrc(45, 9);
  CHECK(greedy_decode(longsrc, params, cfg).size() == 18);  // bucket (50, 20)
  std::vector<text::TokenId> huge(80, 9);
  CHECK(greedy_decode(huge, params, cfg).size() == 18);
  CHECK(greedy_decode({}, params, cfg).size() == 3);

  params.output_b.value(0, text::kEosId) = 1e6;
  CHECK(greedy_decode(shortsrc, params, cfg).empty());
}

TEST_CASE("summarize_text handles OOV and long input") {
  const auto cfg = synthetic::desk_config();
  const auto params = build_model(cfg, 1);
  const auto words = synthetic::bengali_words(60, 9);
  std::vector<std::string> tokens(words.begin(), words.begin() + 40);
  const auto vocab = text::build_vocab(tokens, 50);
  const std::string article = text::join_tokens(words);  // 60 words, 20 OOV
  const std::string summary = summarize_text(article, vocab, params, cfg);
  CHECK(text::tokenize(summary).size() <= 18);
  CHECK_THROWS_AS(summarize_text("   ", vocab, params, cfg), Error);
  CHECK_THROWS_AS(summarize_text("only latin", vocab, params, cfg), Error);
}

TEST_CASE("decay policy waits for three non-improving checkpoints") {
  DecayState s{0.5, {}, 0};
  apply_decay_policy(s, 3.0, 0.99);
  apply_decay_policy(s, 2.0, 0.99);
  CHECK(s.patience == 0);
  apply_decay_policy(s, 2.5, 0.99);
  apply_decay_policy(s, 2.0, 0.99);  // ties do not count as improvement
  CHECK(s.learning_rate == 0.5);
  CHECK(s.patience == 2);
  apply_decay_policy(s, 2.1, 0.99);
  CHECK(s.learning_rate == doctest::Approx(0.495).epsilon(1e-15));
  CHECK(s.patience == 0);
  apply_decay_policy(s, 1.0, 0.99);
  CHECK(s.learning_rate == doctest::Approx(0.495).epsilon(1e-15));
  CHECK(s.val_losses.size() == 6);
}

TEST_CASE("bucketize groups and truncates") {
  const text::BucketSpec spec;
  std::vector<text::EncodedPair> pairs{
      {std::vector<text::TokenId>(4, 5), {6}},
      {std::vector<text::TokenId>(15, 5), {6, 6, 6, 6}},
      {std::vector<text::TokenId>(70, 5), std::vector<text::TokenId>(30, 6)}};
  const auto pools = bucketize(pairs, spec);
  REQUIRE(pools.size() == 5);
  CHECK(pools[0].size() == 1);
  CHECK(pools[1].size() == 1);
  REQUIRE(pools[4].size() == 1);
  CHECK(pools[4][0].source.size() == 50);
  CHECK(pools[4][0].target.size() == 18);
}

TEST_CASE("train_loop writes one checkpoint per interval") {
  auto cfg = synthetic::desk_config();
  cfg.steps_per_checkpoint = 20;
  cfg.max_steps = 40;
  const auto train = synthetic::random_pairs(30, 50, 3, 25, 1, 6, 11);
  const auto val = synthetic::random_pairs(6, 50, 3, 25, 1, 6, 12);
  const auto dir = temp_dir("loop");
  std::size_t seen = 0;
  const auto result = train_loop(train, val, cfg, {dir, std::nullopt, [&](const auto&) { ++seen; }});
  CHECK(result.checkpoint_paths.size() == 2);
  CHECK(seen == 2);
  CHECK(std::filesystem::exists(dir / "ckpt-000020.bin"));
  CHECK(std::filesystem::exists(dir / "ckpt-000040.bin"));
  CHECK(std::filesystem::exists(dir / "train_log.tsv"));
  CHECK(result.final_state.step == 40);
  CHECK(result.final_state.val_losses.size() == 2);
  for (const auto& e : result.log) {
    CHECK(std::isfinite(e.val_loss));
    CHECK(e.perplexity == doctest::Approx(std::exp(e.train_loss)));
  }
  CHECK(checkpoint_filename(350) == "ckpt-000350.bin");
}
