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

#include "bans/seq2seq.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "bans/corpus.hpp"
#include "bans/rng.hpp"

namespace bans::model {

using nn::Matrix;
using text::TokenId;

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error("config field " + key + ": not a number: \"" + s + "\"");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error("config field " + key + ": not an unsigned integer: \"" + s + "\"");
  }
  return v;
}

// Parameter tensors shaped for `config`, all zero.
ModelParams zero_params(const ModelConfig& c) {
  ModelParams p;
  p.embedding = nn::ParamTensor("embedding", Matrix(c.vocab_size, c.embed_dim));
  p.encoder = nn::LstmParams("encoder", c.embed_dim, c.hidden_dim);
  p.decoder = nn::LstmParams("decoder", c.embed_dim + c.hidden_dim, c.hidden_dim);
  p.combine_w = nn::ParamTensor("combine.w", Matrix(c.hidden_dim, 2 * c.hidden_dim));
  p.combine_b = nn::ParamTensor("combine.b", Matrix(1, c.hidden_dim));
  p.output_w = nn::ParamTensor("output.w", Matrix(c.vocab_size, c.hidden_dim));
  p.output_b = nn::ParamTensor("output.b", Matrix(1, c.vocab_size));
  return p;
}

Matrix embed(const ModelParams& p, std::span<const TokenId> ids) {
  const Matrix& e = p.embedding.value;
  Matrix out(ids.size(), e.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= e.rows()) {
      throw Error("token id out of range: " + std::to_string(ids[r]));
    }
    const auto src = e.row(static_cast<std::size_t>(ids[r]));
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

void accumulate_embedding_grad(ModelParams& p, std::span<const TokenId> ids, const Matrix& dx,
                               std::size_t cols) {
  for (std::size_t r = 0; r < ids.size(); ++r) {
    auto g = p.embedding.grad.row(static_cast<std::size_t>(ids[r]));
    const auto d = dx.row(r);
    for (std::size_t j = 0; j < cols; ++j) g[j] += d[j];
  }
}

std::vector<TokenId> grid_row(const text::Grid<TokenId>& g, std::size_t t) {
  std::vector<TokenId> out(g.batch());
  for (std::size_t b = 0; b < g.batch(); ++b) out[b] = g(t, b);
  return out;
}

struct EncoderStep {
  nn::LstmCache lstm;
  std::vector<TokenId> ids;
};

struct Encoded {
  std::vector<EncoderStep> steps;
  std::vector<Matrix> memory;  // per source position, batch x H
  Matrix mask;                 // batch x S
  nn::LstmState final_state;
};

// Runs the encoder over time-major ids. Rows whose id is _PAD keep their
// previous state and are excluded from attention.
Encoded run_encoder(const ModelParams& p, const text::Grid<TokenId>& ids) {
  const std::size_t n = ids.batch();
  const std::size_t hd = p.encoder.hidden_dim;
  Encoded enc;
  enc.mask = Matrix(n, ids.steps());
  nn::LstmState state = nn::LstmState::zeros(n, hd);
  for (std::size_t s = 0; s < ids.steps(); ++s) {
    EncoderStep step;
    step.ids = grid_row(ids, s);
    nn::LstmStep out = nn::lstm_cell_forward(embed(p, step.ids), state, p.encoder);
    for (std::size_t r = 0; r < n; ++r) {
      if (step.ids[r] == text::kPadId) {
        std::copy(state.h.row(r).begin(), state.h.row(r).end(), out.state.h.row(r).begin());
        std::copy(state.c.row(r).begin(), state.c.row(r).end(), out.state.c.row(r).begin());
      } else {
        enc.mask(r, s) = 1.0;
      }
    }
    state = std::move(out.state);
    enc.memory.push_back(state.h);
    step.lstm = std::move(out.cache);
    enc.steps.push_back(std::move(step));
  }
  enc.final_state = std::move(state);
  return enc;
}

struct DecoderStep {
  std::vector<TokenId> ids;
  nn::LstmCache lstm;
  nn::Attention attn;
  Matrix query;     // decoder hidden state h_t
  Matrix combined;  // [context | h_t]
  Matrix htilde;    // tanh(W_c [context | h_t] + b_c)
};

DecoderStep run_decoder_step(const ModelParams& p, std::vector<TokenId> ids,
                             const Matrix& htilde_prev, nn::LstmState& state,
                             const Encoded& enc) {
  DecoderStep d;
  d.ids = std::move(ids);
  const Matrix x = nn::hconcat(embed(p, d.ids), htilde_prev);
  nn::LstmStep out = nn::lstm_cell_forward(x, state, p.decoder);
  state = std::move(out.state);
  d.lstm = std::move(out.cache);
  d.query = state.h;
  d.attn = nn::attend(d.query, enc.memory, enc.mask);
  d.combined = nn::hconcat(d.attn.context, d.query);
  d.htilde = nn::matmul_nt(d.combined, p.combine_w.value);
  nn::add_row_bias(d.htilde, p.combine_b.value);
  for (double& v : d.htilde.data()) v = std::tanh(v);
  return d;
}

}  // namespace

void ModelConfig::validate() const {
  if (vocab_size < 5) throw Error("config field vocab_size must be >= 5");
  if (embed_dim < 1) throw Error("config field embed_dim must be >= 1");
  if (hidden_dim < 1) throw Error("config field hidden_dim must be >= 1");
  if (num_layers != 1) throw Error("config field num_layers must be 1");
  if (batch_size < 1) throw Error("config field batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error("config field learning_rate must be > 0");
  }
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0)) {
    throw Error("config field lr_decay_factor must be in (0, 1]");
  }
  if (!(max_grad_norm > 0.0)) throw Error("config field max_grad_norm must be > 0");
  if (steps_per_checkpoint < 1) throw Error("config field steps_per_checkpoint must be >= 1");
  if (max_steps < 1) throw Error("config field max_steps must be >= 1");
}

std::map<std::string, std::string> ModelConfig::to_map() const {
  return {
      {"vocab_size", std::to_string(vocab_size)},
      {"embed_dim", std::to_string(embed_dim)},
      {"hidden_dim", std::to_string(hidden_dim)},
      {"num_layers", std::to_string(num_layers)},
      {"buckets", format_buckets(buckets)},
      {"batch_size", std::to_string(batch_size)},
      {"learning_rate", format_double(learning_rate)},
      {"lr_decay_factor", format_double(lr_decay_factor)},
      {"max_grad_norm", format_double(max_grad_norm)},
      {"steps_per_checkpoint", std::to_string(steps_per_checkpoint)},
      {"max_steps", std::to_string(max_steps)},
      {"seed", std::to_string(seed)},
  };
}

void ModelConfig::apply(const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "vocab_size") vocab_size = parse_uint(key, value);
    else if (key == "embed_dim") embed_dim = parse_uint(key, value);
    else if (key == "hidden_dim") hidden_dim = parse_uint(key, value);
    else if (key == "num_layers") num_layers = parse_uint(key, value);
    else if (key == "buckets") buckets = parse_buckets(value);
    else if (key == "batch_size") batch_size = parse_uint(key, value);
    else if (key == "learning_rate") learning_rate = parse_double(key, value);
    else if (key == "lr_decay_factor") lr_decay_factor = parse_double(key, value);
    else if (key == "max_grad_norm") max_grad_norm = parse_double(key, value);
    else if (key == "steps_per_checkpoint") steps_per_checkpoint = parse_uint(key, value);
    else if (key == "max_steps") max_steps = parse_uint(key, value);
    else if (key == "seed") seed = parse_uint(key, value);
    else throw Error("unknown config key: " + key);
  }
}

std::string format_buckets(const text::BucketSpec& spec) {
  std::string out;
  for (const auto& b : spec.buckets()) {
    if (!out.empty()) out += ',';
    out += std::to_string(b.source_len) + ':' + std::to_string(b.target_len);
  }
  return out;
}

text::BucketSpec parse_buckets(const std::string& s) {
  std::vector<text::Bucket> buckets;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw Error("config field buckets: expected src:tgt");
    buckets.push_back({parse_uint("buckets", item.substr(0, colon)),
                       parse_uint("buckets", item.substr(colon + 1))});
  }
  return text::BucketSpec(std::move(buckets));
}

std::vector<nn::ParamTensor*> ModelParams::tensors() {
  return {&embedding, &encoder.w, &encoder.u, &encoder.b, &decoder.w, &decoder.u,
          &decoder.b, &combine_w, &combine_b, &output_w,  &output_b};
}

std::vector<const nn::ParamTensor*> ModelParams::tensors() const {
  return {&embedding, &encoder.w, &encoder.u, &encoder.b, &decoder.w, &decoder.u,
          &decoder.b, &combine_w, &combine_b, &output_w,  &output_b};
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto* t : tensors()) n += t->value.size();
  return n;
}

void ModelParams::zero_grad() {
  for (auto* t : tensors()) t->zero_grad();
}

ModelParams build_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelParams p = zero_params(config);
  Rng rng(seed);
  const double scale = nn::kDefaultInitScale;
  // Weight matrices in tensors() order; biases stay zero.
  for (nn::ParamTensor* t : p.tensors()) {
    if (t->value.rows() == 1) continue;
    t->value = nn::init_uniform(t->value.rows(), t->value.cols(), scale, rng);
  }
  for (nn::LstmParams* lstm : {&p.encoder, &p.decoder}) {
    const std::size_t hd = lstm->hidden_dim;
    for (std::size_t j = 0; j < hd; ++j) lstm->b.value(0, hd + j) = 1.0;
  }
  return p;
}

struct ForwardCache {
  std::size_t batch = 0;
  Encoded enc;
  std::vector<DecoderStep> dec;
  Matrix stacked;  // (T * batch) x H
  Matrix dlogits;
};

ForwardResult forward_batch(const text::Batch& batch, const ModelParams& params,
                            const ModelConfig& config) {
  if (batch.bucket_index >= config.buckets.size()) throw Error("batch bucket out of range");
  const text::Bucket& bucket = config.buckets[batch.bucket_index];
  const std::size_t n = batch.batch_size();
  if (batch.encoder_ids.steps() != bucket.source_len ||
      batch.decoder_ids.steps() != bucket.target_len ||
      batch.target_weights.steps() != bucket.target_len || batch.decoder_ids.batch() != n ||
      batch.target_weights.batch() != n) {
    throw Error("shape mismatch: batch does not fit its bucket");
  }
  const std::size_t hd = config.hidden_dim;
  const std::size_t steps = bucket.target_len;

  auto cache = std::make_shared<ForwardCache>();
  cache->batch = n;
  cache->enc = run_encoder(params, batch.encoder_ids);

  nn::LstmState state = cache->enc.final_state;
  Matrix htilde(n, hd);
  cache->stacked = Matrix(steps * n, hd);
  for (std::size_t t = 0; t < steps; ++t) {
    DecoderStep d =
        run_decoder_step(params, grid_row(batch.decoder_ids, t), htilde, state, cache->enc);
    htilde = d.htilde;
    for (std::size_t r = 0; r < n; ++r) {
      std::copy(htilde.row(r).begin(), htilde.row(r).end(), cache->stacked.row(t * n + r).begin());
    }
    cache->dec.push_back(std::move(d));
  }

  ForwardResult out;
  out.logits = nn::matmul_nt(cache->stacked, params.output_w.value);
  nn::add_row_bias(out.logits, params.output_b.value);

  std::vector<std::int32_t> targets(steps * n);
  std::vector<double> weights(steps * n);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t r = 0; r < n; ++r) {
      targets[t * n + r] = t + 1 < steps ? batch.decoder_ids(t + 1, r) : text::kPadId;
      weights[t * n + r] = batch.target_weights(t, r);
    }
  }
  nn::CrossEntropy ce = nn::cross_entropy(out.logits, targets, weights);
  out.loss = ce.loss;
  cache->dlogits = std::move(ce.dlogits);
  out.cache = std::move(cache);
  return out;
}

void backward_batch(const ForwardResult& forward, ModelParams& params) {
  const ForwardCache& k = *forward.cache;
  const std::size_t n = k.batch;
  const std::size_t hd = params.decoder.hidden_dim;
  const std::size_t ed = params.embedding.value.cols();
  const std::size_t steps = k.dec.size();

  nn::add_matmul_tn(params.output_w.grad, k.dlogits, k.stacked);
  nn::add_column_sums(params.output_b.grad, k.dlogits);
  const Matrix dstacked = nn::matmul(k.dlogits, params.output_w.value);

  std::vector<Matrix> dmemory(k.enc.memory.size(), Matrix(n, hd));
  Matrix dh_next(n, hd), dc_next(n, hd), dhtilde_next(n, hd);
  for (std::size_t t = steps; t-- > 0;) {
    const DecoderStep& d = k.dec[t];
    Matrix dpre = dhtilde_next;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < hd; ++j) {
        const double y = d.htilde(r, j);
        dpre(r, j) = (dpre(r, j) + dstacked(t * n + r, j)) * (1.0 - y * y);
      }
    }
    nn::add_matmul_tn(params.combine_w.grad, dpre, d.combined);
    nn::add_column_sums(params.combine_b.grad, dpre);
    const Matrix dcombined = nn::matmul(dpre, params.combine_w.value);
    const Matrix dcontext = nn::slice_cols(dcombined, 0, hd);
    Matrix dh = nn::slice_cols(dcombined, hd, hd);
    nn::add_in_place(dh, dh_next);
    nn::attend_backward(d.query, k.enc.memory, d.attn, dcontext, dh, dmemory);

    nn::LstmBackward lb = nn::lstm_cell_backward(d.lstm, dh, dc_next, params.decoder);
    accumulate_embedding_grad(params, d.ids, lb.dx, ed);
    dhtilde_next = nn::slice_cols(lb.dx, ed, hd);
    dh_next = std::move(lb.dh_prev);
    dc_next = std::move(lb.dc_prev);
  }

  for (std::size_t s = k.enc.steps.size(); s-- > 0;) {
    const EncoderStep& e = k.enc.steps[s];
    Matrix dh = dh_next;
    nn::add_in_place(dh, dmemory[s]);
    Matrix dc = dc_next;
    Matrix pass_h(n, hd), pass_c(n, hd);
    for (std::size_t r = 0; r < n; ++r) {
      if (e.ids[r] != text::kPadId) continue;
      for (std::size_t j = 0; j < hd; ++j) {
        pass_h(r, j) = dh(r, j);
        pass_c(r, j) = dc(r, j);
        dh(r, j) = 0.0;
        dc(r, j) = 0.0;
      }
    }
    nn::LstmBackward lb = nn::lstm_cell_backward(e.lstm, dh, dc, params.encoder);
    for (std::size_t r = 0; r < n; ++r) {
      if (e.ids[r] == text::kPadId) continue;
      auto g = params.embedding.grad.row(static_cast<std::size_t>(e.ids[r]));
      const auto dx = lb.dx.row(r);
      for (std::size_t j = 0; j < ed; ++j) g[j] += dx[j];
    }
    nn::add_in_place(lb.dh_prev, pass_h);
    nn::add_in_place(lb.dc_prev, pass_c);
    dh_next = std::move(lb.dh_prev);
    dc_next = std::move(lb.dc_prev);
  }
}

double train_step(const text::Batch& batch, ModelParams& params, const ModelConfig& config,
                  double lr) {
  params.zero_grad();
  const ForwardResult fwd = forward_batch(batch, params, config);
  if (!std::isfinite(fwd.loss)) throw Error("non-finite training loss");
  backward_batch(fwd, params);
  const auto tensors = params.tensors();
  nn::clip_global_norm(tensors, config.max_grad_norm);
  nn::sgd_step(tensors, lr);
  return fwd.loss;
}

std::vector<TokenId> greedy_decode(std::span<const TokenId> source, const ModelParams& params,
                                   const ModelConfig& config) {
  const text::BucketAssignment a = text::assign_bucket(source.size(), 0, config.buckets);
  const text::Bucket& bucket = config.buckets[a.index];
  const auto column = text::encoder_column(source, bucket.source_len);
  text::Grid<TokenId> ids(bucket.source_len, 1);
  for (std::size_t s = 0; s < column.size(); ++s) ids(s, 0) = column[s];

  const Encoded enc = run_encoder(params, ids);
  nn::LstmState state = enc.final_state;
  Matrix htilde(1, config.hidden_dim);
  TokenId input = text::kGoId;
  std::vector<TokenId> out;
  const std::size_t max_len = bucket.target_len - 2;
  for (std::size_t t = 0; t + 1 < bucket.target_len && out.size() < max_len; ++t) {
    DecoderStep d = run_decoder_step(params, {input}, htilde, state, enc);
    htilde = std::move(d.htilde);
    Matrix logits = nn::matmul_nt(htilde, params.output_w.value);
    nn::add_row_bias(logits, params.output_b.value);
    const auto row = logits.row(0);
    std::size_t best = 0;
    for (std::size_t v = 1; v < row.size(); ++v) {
      if (row[v] > row[best]) best = v;
    }
    input = static_cast<TokenId>(best);
    if (input == text::kEosId) break;
    out.push_back(input);
  }
  return out;
}

std::string summarize_text(std::string_view raw, const text::Vocabulary& vocab,
                           const ModelParams& params, const ModelConfig& config) {
  const std::string cleaned = corpus::clean_text(raw);
  if (cleaned.empty()) throw Error("empty input");
  std::vector<std::string> tokens = text::tokenize(cleaned);
  if (tokens.size() > config.buckets.largest().source_len) {
    tokens.resize(config.buckets.largest().source_len);
  }
  const std::vector<TokenId> ids = vocab.encode(tokens);
  const std::vector<std::string> words = vocab.decode(greedy_decode(ids, params, config));
  return text::join_tokens(words);
}

std::vector<std::vector<text::EncodedPair>> bucketize(std::span<const text::EncodedPair> pairs,
                                                      const text::BucketSpec& spec) {
  std::vector<std::vector<text::EncodedPair>> pools(spec.size());
  for (const auto& p : pairs) {
    const auto a = text::assign_bucket(p.source.size(), p.target.size(), spec);
    text::EncodedPair q = p;
    if (a.truncated) {
      const text::Bucket& b = spec[a.index];
      if (q.source.size() > b.source_len) q.source.resize(b.source_len);
      if (q.target.size() > b.target_len - 2) q.target.resize(b.target_len - 2);
    }
    pools[a.index].push_back(std::move(q));
  }
  return pools;
}

ValidationLoss validation_loss(std::span<const std::vector<text::EncodedPair>> pools,
                               const ModelParams& params, const ModelConfig& config) {
  ValidationLoss out;
  out.per_bucket.resize(pools.size());
  double weighted = 0.0;
  std::size_t pairs = 0;
  for (std::size_t b = 0; b < pools.size(); ++b) {
    const auto& pool = pools[b];
    if (pool.empty()) continue;
    double loss_sum = 0.0;
    double weight_sum = 0.0;
    for (std::size_t start = 0; start < pool.size(); start += config.batch_size) {
      const std::size_t end = std::min(pool.size(), start + config.batch_size);
      std::vector<const text::EncodedPair*> chunk;
      for (std::size_t i = start; i < end; ++i) chunk.push_back(&pool[i]);
      const text::Batch batch = text::make_batch(chunk, b, config.buckets);
      double w = 0.0;
      for (const double x : batch.target_weights.data()) w += x;
      loss_sum += forward_batch(batch, params, config).loss * w;
      weight_sum += w;
    }
    const double loss = loss_sum / weight_sum;
    out.per_bucket[b] = loss;
    weighted += loss * static_cast<double>(pool.size());
    pairs += pool.size();
  }
  if (pairs == 0) throw Error("empty validation set");
  out.mean = weighted / static_cast<double>(pairs);
  return out;
}

void apply_decay_policy(DecayState& state, double val_loss, double decay_factor) {
  double best = std::numeric_limits<double>::infinity();
  for (const double v : state.val_losses) best = std::min(best, v);
  state.val_losses.push_back(val_loss);
  if (val_loss < best) {
    state.patience = 0;
    return;
  }
  if (++state.patience >= kDecayPatience) {
    state.learning_rate *= decay_factor;
    state.patience = 0;
  }
}

std::string checkpoint_filename(std::uint64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt-%06llu.bin", static_cast<unsigned long long>(step));
  return buf;
}

namespace {

void append_log(const std::filesystem::path& dir, const TrainLogEntry& e) {
  const auto path = dir / "train_log.tsv";
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot write " + path.string());
  if (fresh) {
    out << "step\tlearning_rate\ttrain_loss\tperplexity\tval_loss";
    for (std::size_t b = 0; b < e.bucket_val_loss.size(); ++b) out << "\tval_bucket" << b;
    out << '\n';
  }
  out << e.step << '\t' << format_double(e.learning_rate) << '\t' << format_double(e.train_loss)
      << '\t' << format_double(e.perplexity) << '\t' << format_double(e.val_loss);
  for (const auto& v : e.bucket_val_loss) out << '\t' << (v ? format_double(*v) : "-");
  out << '\n';
}

}  // namespace

TrainResult train_loop(std::span<const text::EncodedPair> train,
                       std::span<const text::EncodedPair> val, const ModelConfig& config,
                       const TrainOptions& options) {
  config.validate();
  if (train.empty()) throw Error("empty training set");
  if (val.empty()) throw Error("empty validation set");
  const auto pools = bucketize(train, config.buckets);
  const auto val_pools = bucketize(val, config.buckets);

  TrainResult result;
  Checkpoint& state = result.final_state;
  DecayState decay;
  if (options.resume) {
    ModelConfig a = options.resume->config;
    ModelConfig b = config;
    a.max_steps = b.max_steps = 0;
    if (!(a == b)) throw Error("resume checkpoint was trained with a different config");
    state.params = options.resume->params;
    state.step = options.resume->step;
    decay = {options.resume->learning_rate, options.resume->val_losses,
             options.resume->patience};
  } else {
    state.params = build_model(config, config.seed);
    decay.learning_rate = config.learning_rate;
  }
  state.config = config;

  if (!options.checkpoint_dir.empty()) {
    std::filesystem::create_directories(options.checkpoint_dir);
  }

  std::vector<std::size_t> cumulative;
  std::size_t total = 0;
  for (const auto& pool : pools) cumulative.push_back(total += pool.size());

  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  for (std::uint64_t step = state.step + 1; step <= config.max_steps; ++step) {
    Rng rng(derive_seed(config.seed, step));
    const std::size_t pick = rng.below(total);
    std::size_t bucket = 0;
    while (pick >= cumulative[bucket]) ++bucket;
    const text::Batch batch =
        text::assemble_batch(pools[bucket], bucket, config.buckets, config.batch_size, rng);
    loss_sum += train_step(batch, state.params, config, decay.learning_rate);
    ++loss_count;
    state.step = step;

    if (step % config.steps_per_checkpoint != 0) continue;
    const ValidationLoss vl = validation_loss(val_pools, state.params, config);
    TrainLogEntry entry;
    entry.step = step;
    entry.learning_rate = decay.learning_rate;
    entry.train_loss = loss_sum / static_cast<double>(loss_count);
    entry.perplexity = std::exp(entry.train_loss);
    entry.val_loss = vl.mean;
    entry.bucket_val_loss = vl.per_bucket;
    loss_sum = 0.0;
    loss_count = 0;

    apply_decay_policy(decay, vl.mean, config.lr_decay_factor);
    state.learning_rate = decay.learning_rate;
    state.val_losses = decay.val_losses;
    state.patience = decay.patience;

    if (!options.checkpoint_dir.empty()) {
      const auto path = options.checkpoint_dir / checkpoint_filename(step);
      checkpoint_save(path, state);
      append_log(options.checkpoint_dir, entry);
      result.checkpoint_paths.push_back(path);
    }
    if (options.on_log) options.on_log(entry);
    result.log.push_back(std::move(entry));
  }
  state.learning_rate = decay.learning_rate;
  state.val_losses = decay.val_losses;
  state.patience = decay.patience;
  return result;
}

}  // namespace bans::model
