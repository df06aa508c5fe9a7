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

#ifndef BANS_SEQ2SEQ_HPP_
#define BANS_SEQ2SEQ_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bans/error.hpp"
#include "bans/nnkernel.hpp"
#include "bans/textproc.hpp"

namespace bans::model {

struct ModelConfig {
  std::size_t vocab_size = text::kDefaultVocabSize;
  std::size_t embed_dim = 512;
  std::size_t hidden_dim = 512;
  std::size_t num_layers = 1;
  text::BucketSpec buckets;
  std::size_t batch_size = 64;
  double learning_rate = 0.5;
  double lr_decay_factor = 0.99;
  double max_grad_norm = 5.0;
  std::size_t steps_per_checkpoint = 350;
  std::size_t max_steps = 350;
  std::uint64_t seed = 0;

  // Throws bans::Error naming the offending field.
  void validate() const;

  // Flat key -> value form used by config files and checkpoints. Doubles are
  // written in shortest round-trip form.
  std::map<std::string, std::string> to_map() const;
  // Applies recognized keys from `kv` on top of *this; unknown keys throw.
  void apply(const std::map<std::string, std::string>& kv);

  bool operator==(const ModelConfig&) const = default;
};

// "10:5,20:8,..." <-> BucketSpec.
std::string format_buckets(const text::BucketSpec& spec);
text::BucketSpec parse_buckets(const std::string& text);

// All trainable weights. tensors() lists them in the fixed order used for
// initialization and serialization.
struct ModelParams {
  nn::ParamTensor embedding;  // V x D, shared by encoder and decoder inputs
  nn::LstmParams encoder;     // input D
  nn::LstmParams decoder;     // input D + H (input feeding)
  nn::ParamTensor combine_w;  // H x 2H
  nn::ParamTensor combine_b;  // 1 x H
  nn::ParamTensor output_w;   // V x H
  nn::ParamTensor output_b;   // 1 x V

  std::vector<nn::ParamTensor*> tensors();
  std::vector<const nn::ParamTensor*> tensors() const;
  std::size_t parameter_count() const;
  void zero_grad();
};

ModelParams build_model(const ModelConfig& config, std::uint64_t seed);

// Intermediate values kept by forward_batch for the backward pass.
struct ForwardCache;

struct ForwardResult {
  double loss = 0.0;
  nn::Matrix logits;  // (target_len * batch) x V, row t * batch + b
  std::shared_ptr<ForwardCache> cache;
};

// Teacher-forced loss of a batch.
ForwardResult forward_batch(const text::Batch& batch, const ModelParams& params,
                            const ModelConfig& config);

// Accumulates gradients of forward.loss into params[*].grad.
void backward_batch(const ForwardResult& forward, ModelParams& params);

// Forward, backward, clip, SGD update. Returns the pre-update loss; throws
// before touching params when the loss is not finite.
double train_step(const text::Batch& batch, ModelParams& params, const ModelConfig& config,
                  double lr);

// Greedy argmax decoding in the smallest bucket that fits the source. The
// result excludes _GO and _EOS and never exceeds target_len - 2 ids.
std::vector<text::TokenId> greedy_decode(std::span<const text::TokenId> source,
                                         const ModelParams& params,
                                         const ModelConfig& config);

// clean -> tokenize -> encode -> greedy_decode -> decode -> join.
std::string summarize_text(std::string_view raw, const text::Vocabulary& vocab,
                           const ModelParams& params, const ModelConfig& config);

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint32_t format_version = kCheckpointVersion;
  std::uint64_t step = 0;
  ModelConfig config;
  ModelParams params;
  double learning_rate = 0.0;
  std::vector<double> val_losses;  // one per checkpoint so far
  std::uint32_t patience = 0;      // consecutive non-improving checkpoints
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};
class CheckpointVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CheckpointTruncatedError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CheckpointChecksumError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);
// Atomic: writes `path`.tmp then renames.
void checkpoint_save(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint checkpoint_load(const std::filesystem::path& path);
// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

struct TrainLogEntry {
  std::uint64_t step = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double perplexity = 0.0;
  double val_loss = 0.0;
  std::vector<std::optional<double>> bucket_val_loss;  // empty bucket -> nullopt
};

struct TrainOptions {
  // Checkpoints (ckpt-NNNNNN.bin) and train_log.tsv go here; empty disables
  // writing.
  std::filesystem::path checkpoint_dir;
  std::optional<Checkpoint> resume;
  std::function<void(const TrainLogEntry&)> on_log;
};

struct TrainResult {
  Checkpoint final_state;
  std::vector<std::filesystem::path> checkpoint_paths;
  std::vector<TrainLogEntry> log;
};

// Groups encoded pairs by assigned bucket (truncating where needed).
std::vector<std::vector<text::EncodedPair>> bucketize(std::span<const text::EncodedPair> pairs,
                                                      const text::BucketSpec& spec);

struct ValidationLoss {
  double mean = 0.0;  // weighted by pairs per bucket
  std::vector<std::optional<double>> per_bucket;
};

ValidationLoss validation_loss(std::span<const std::vector<text::EncodedPair>> pools,
                               const ModelParams& params, const ModelConfig& config);

// Learning-rate policy applied at every checkpoint.
struct DecayState {
  double learning_rate = 0.0;
  std::vector<double> val_losses;
  std::uint32_t patience = 0;
};
void apply_decay_policy(DecayState& state, double val_loss, double decay_factor);
inline constexpr std::uint32_t kDecayPatience = 3;

TrainResult train_loop(std::span<const text::EncodedPair> train,
                       std::span<const text::EncodedPair> val, const ModelConfig& config,
                       const TrainOptions& options = {});

std::string checkpoint_filename(std::uint64_t step);

}  // namespace bans::model

#endif  // BANS_SEQ2SEQ_HPP_
