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

// Checkpoint layout (all integers and floats little-endian):
//
//   "BANS"                      4 bytes magic
//   format_version              u32
//   tensor_count                u32
//   tensor_count x {
//     name_len                  u32
//     name                      name_len bytes, UTF-8
//     rank                      u32
//     dims                      rank x u64
//     payload                   prod(dims) x f64
//   }
//   step                        u64
//   learning_rate               f64
//   patience                    u32
//   val_loss_count              u32
//   val_losses                  val_loss_count x f64
//   config_len                  u32
//   config                      config_len bytes of "key=value\n" lines
//   checksum                    u64, FNV-1a over every preceding byte

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "bans/seq2seq.hpp"

namespace bans::model {
namespace {

constexpr char kMagic[4] = {'B', 'A', 'N', 'S'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > in_.size() - pos_) throw CheckpointTruncatedError("checkpoint truncated");
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() {
    auto s = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(s[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    auto s = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(s[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    auto s = take(n);
    return std::string(s.begin(), s.end());
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::string config_text(const ModelConfig& c) {
  std::string out;
  for (const auto& [k, v] : c.to_map()) out += k + "=" + v + "\n";
  return out;
}

ModelConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    const std::string line = text.substr(start, end - start);
    start = end == std::string::npos ? text.size() : end + 1;
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw CheckpointError("checkpoint: malformed config block");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  ModelConfig c;
  c.apply(kv);
  c.validate();
  return c;
}

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(ckpt.format_version);
  const auto tensors = ckpt.params.tensors();
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const nn::ParamTensor* t : tensors) {
    w.str(t->name);
    w.u32(2);
    w.u64(t->value.rows());
    w.u64(t->value.cols());
    for (const double v : t->value.data()) w.f64(v);
  }
  w.u64(ckpt.step);
  w.f64(ckpt.learning_rate);
  w.u32(ckpt.patience);
  w.u32(static_cast<std::uint32_t>(ckpt.val_losses.size()));
  for (const double v : ckpt.val_losses) w.f64(v);
  w.str(config_text(ckpt.config));
  w.u64(fnv1a64(w.buffer()));
  return std::move(w.buffer());
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw CheckpointError("not a checkpoint file");
  Checkpoint ckpt;
  ckpt.format_version = r.u32();
  if (ckpt.format_version != kCheckpointVersion) {
    throw CheckpointVersionError("checkpoint format version " +
                                 std::to_string(ckpt.format_version) + ", expected " +
                                 std::to_string(kCheckpointVersion));
  }
  std::map<std::string, nn::Matrix> loaded;
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    const std::uint32_t rank = r.u32();
    if (rank != 2) throw CheckpointError("checkpoint: tensor " + name + " has rank != 2");
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (cols != 0 && rows > r.remaining() / 8 / cols) {
      throw CheckpointTruncatedError("checkpoint truncated");
    }
    nn::Matrix m(rows, cols);
    for (double& v : m.data()) v = r.f64();
    loaded.emplace(std::move(name), std::move(m));
  }
  ckpt.step = r.u64();
  ckpt.learning_rate = r.f64();
  ckpt.patience = r.u32();
  const std::uint32_t n_val = r.u32();
  if (n_val > r.remaining() / 8) throw CheckpointTruncatedError("checkpoint truncated");
  ckpt.val_losses.resize(n_val);
  for (double& v : ckpt.val_losses) v = r.f64();
  const std::string config = r.str();
  const std::size_t body = r.position();
  const std::uint64_t stored = r.u64();
  if (r.remaining() != 0) throw CheckpointError("checkpoint: trailing bytes");
  if (fnv1a64(bytes.first(body)) != stored) {
    throw CheckpointChecksumError("checkpoint checksum mismatch");
  }

  ckpt.config = parse_config_text(config);
  ckpt.params = build_model(ckpt.config, 0);
  for (nn::ParamTensor* t : ckpt.params.tensors()) {
    auto it = loaded.find(t->name);
    if (it == loaded.end()) throw CheckpointError("checkpoint: missing tensor " + t->name);
    if (!it->second.same_shape(t->value)) {
      throw CheckpointError("checkpoint: tensor " + t->name + " has the wrong shape");
    }
    t->value = std::move(it->second);
    t->zero_grad();
    loaded.erase(it);
  }
  if (!loaded.empty()) throw CheckpointError("checkpoint: unknown tensor " + loaded.begin()->first);
  return ckpt;
}

void checkpoint_save(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = serialize_checkpoint(ckpt);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint checkpoint_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace bans::model
