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
#include <iterator>

#include "bans/seq2seq.hpp"
#include "doctest.h"
#include "synthetic.hpp"

using namespace bans;
using namespace bans::model;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "bans_test_checkpoint" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.config = synthetic::desk_config();
  c.params = build_model(c.config, 3);
  c.step = 1234;
  c.learning_rate = 0.495;
  c.val_losses = {3.5, 3.25, 3.4};
  c.patience = 1;
  return c;
}

void restamp(std::vector<std::uint8_t>& bytes) {
  const std::uint64_t sum = fnv1a64(std::span(bytes).first(bytes.size() - 8));
  for (int i = 0; i < 8; ++i) bytes[bytes.size() - 8 + i] = static_cast<std::uint8_t>(sum >> (8 * i));
}

}  // namespace

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64({}) == 0xcbf29ce484222325ULL);
  const std::uint8_t a[] = {'a'};
  CHECK(fnv1a64(a) == 0xaf63dc4c8601ec8cULL);
  const std::uint8_t foobar[] = {'f', 'o', 'o', 'b', 'a', 'r'};
  CHECK(fnv1a64(foobar) == 0x85944171f73967e8ULL);
}

TEST_CASE("checkpoint round trip is lossless") {
  const auto c = sample_checkpoint();
  const auto dir = temp_dir("roundtrip");
  checkpoint_save(dir / "a.bin", c);
  CHECK_FALSE(std::filesystem::exists(dir / "a.bin.tmp"));
  const auto back = checkpoint_load(dir / "a.bin");
  CHECK(back.step == c.step);
  CHECK(back.learning_rate == c.learning_rate);
  CHECK(back.val_losses == c.val_losses);
  CHECK(back.patience == c.patience);
  CHECK(back.config == c.config);
  CHECK(back.format_version == kCheckpointVersion);
  const auto ta = c.params.tensors();
  const auto tb = back.params.tensors();
  REQUIRE(ta.size() == tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    CHECK(ta[i]->name == tb[i]->name);
    CHECK(ta[i]->value == tb[i]->value);
  }
  CHECK(serialize_checkpoint(back) == serialize_checkpoint(c));
  CHECK(read_bytes(dir / "a.bin") == serialize_checkpoint(c));
}

TEST_CASE("version mismatch is reported as such") {
  auto bytes = serialize_checkpoint(sample_checkpoint());
  bytes[4] = 2;
  restamp(bytes);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes), CheckpointVersionError);
}

TEST_CASE("truncated checkpoints are rejected") {
  const auto bytes = serialize_checkpoint(sample_checkpoint());
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{11}, std::size_t{100},
                          bytes.size() / 2, bytes.size() - 9, bytes.size() - 1}) {
    INFO(cut);
    CHECK_THROWS_AS(deserialize_checkpoint(std::span(bytes).first(cut)), CheckpointError);
  }
  CHECK_THROWS_AS(deserialize_checkpoint(std::span(bytes).first(bytes.size() / 2)),
                  CheckpointTruncatedError);
}

TEST_CASE("corrupted payload fails the checksum") {
  auto bytes = serialize_checkpoint(sample_checkpoint());
  bytes[bytes.size() / 2] ^= 0x10;
  CHECK_THROWS_AS(deserialize_checkpoint(bytes), CheckpointChecksumError);
  auto bad_magic = serialize_checkpoint(sample_checkpoint());
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(bad_magic), CheckpointError);
}

TEST_CASE("missing file is an error") {
  CHECK_THROWS_AS(checkpoint_load(temp_dir("missing") / "nope.bin"), Error);
}

TEST_CASE("resumed training matches an uninterrupted run") {
  auto cfg = synthetic::desk_config();
  cfg.steps_per_checkpoint = 25;
  cfg.max_steps = 50;
  const auto train = synthetic::random_pairs(40, 50, 3, 30, 1, 8, 31);
  const auto val = synthetic::random_pairs(8, 50, 3, 30, 1, 8, 32);

  const auto full = train_loop(train, val, cfg, {temp_dir("full")});
  REQUIRE(full.checkpoint_paths.size() == 2);

  const auto again = train_loop(train, val, cfg, {temp_dir("again")});
  CHECK(read_bytes(again.checkpoint_paths[0]) == read_bytes(full.checkpoint_paths[0]));
  CHECK(read_bytes(again.checkpoint_paths[1]) == read_bytes(full.checkpoint_paths[1]));

  // A shorter run stores a different max_steps but the same weights.
  auto half_cfg = cfg;
  half_cfg.max_steps = 25;
  const auto half = train_loop(train, val, half_cfg, {temp_dir("half")});
  CHECK(half.final_state.params.output_w.value ==
        checkpoint_load(full.checkpoint_paths[0]).params.output_w.value);

  const auto resumed = train_loop(train, val, cfg,
                                  {temp_dir("resumed"), checkpoint_load(full.checkpoint_paths[0])});
  REQUIRE(resumed.checkpoint_paths.size() == 1);
  CHECK(read_bytes(resumed.checkpoint_paths[0]) == read_bytes(full.checkpoint_paths[1]));

  // Resuming a shorter run with a longer horizon is allowed.
  const auto extended =
      train_loop(train, val, cfg, {temp_dir("extended"), checkpoint_load(half.checkpoint_paths[0])});
  CHECK(extended.final_state.params.output_w.value == full.final_state.params.output_w.value);

  auto other = cfg;
  other.hidden_dim = 16;
  CHECK_THROWS_AS(train_loop(train, val, other, {temp_dir("bad"), checkpoint_load(half.checkpoint_paths[0])}),
                  Error);
}
