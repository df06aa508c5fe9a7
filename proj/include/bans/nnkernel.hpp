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

#ifndef BANS_NNKERNEL_HPP_
#define BANS_NNKERNEL_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bans/rng.hpp"

namespace bans::nn {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool all_finite() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// a * b^T  (a: m x k, b: n x k).
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// a * b    (a: m x k, b: k x n).
Matrix matmul(const Matrix& a, const Matrix& b);
// acc += a^T * b  (a: m x n, b: m x k, acc: n x k).
void add_matmul_tn(Matrix& acc, const Matrix& a, const Matrix& b);
// m[r, :] += bias[0, :] for every row.
void add_row_bias(Matrix& m, const Matrix& bias);
// acc[0, :] += column sums of m.
void add_column_sums(Matrix& acc, const Matrix& m);
// [a | b] column-wise.
Matrix hconcat(const Matrix& a, const Matrix& b);
// Columns [begin, begin + count).
Matrix slice_cols(const Matrix& m, std::size_t begin, std::size_t count);
void add_in_place(Matrix& acc, const Matrix& m);

// Entries uniform in [-scale, scale]. Throws when scale <= 0.
Matrix init_uniform(std::size_t rows, std::size_t cols, double scale, Rng& rng);
inline constexpr double kDefaultInitScale = 0.08;

// A trainable tensor and its gradient accumulator.
struct ParamTensor {
  std::string name;
  Matrix value;
  Matrix grad;

  ParamTensor() = default;
  ParamTensor(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad.fill(0.0); }
};

// exp(x - max) / sum, row by row.
Matrix softmax_rows(const Matrix& logits);

struct CrossEntropy {
  double loss = 0.0;
  Matrix dlogits;
};

// Weighted mean of -log softmax(logits_i)[target_i]; throws when all weights
// are zero.
CrossEntropy cross_entropy(const Matrix& logits, std::span<const std::int32_t> targets,
                           std::span<const double> weights);

// Gate blocks are stacked in the order input, forget, output, candidate.
struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  ParamTensor w;  // 4H x input_dim
  ParamTensor u;  // 4H x H
  ParamTensor b;  // 1 x 4H

  LstmParams() = default;
  LstmParams(const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim);
};

// Batched state: one row per sequence.
struct LstmState {
  Matrix h;
  Matrix c;

  static LstmState zeros(std::size_t batch, std::size_t hidden_dim) {
    return {Matrix(batch, hidden_dim), Matrix(batch, hidden_dim)};
  }
};

struct LstmCache {
  Matrix x, h_prev, c_prev;
  Matrix i, f, o, g;
  Matrix c, tanh_c;
};

struct LstmStep {
  LstmState state;
  LstmCache cache;
};

LstmStep lstm_cell_forward(const Matrix& x, const LstmState& state, const LstmParams& p);

struct LstmBackward {
  Matrix dx;
  Matrix dh_prev;
  Matrix dc_prev;
};

// Accumulates parameter gradients into p.{w,u,b}.grad.
LstmBackward lstm_cell_backward(const LstmCache& cache, const Matrix& dh, const Matrix& dc,
                                LstmParams& p);

// Batched dot-product attention. memory[s] is batch x H; mask (batch x S)
// holds 1 for attendable positions. Rows with no attendable position get
// zero weights and a zero context.
struct Attention {
  Matrix context;  // batch x H
  Matrix weights;  // batch x S
};

Attention attend(const Matrix& query, std::span<const Matrix> memory, const Matrix& mask);

// Adds dL/dquery into dquery and dL/dmemory[s] into dmemory[s].
void attend_backward(const Matrix& query, std::span<const Matrix> memory,
                     const Attention& fwd, const Matrix& dcontext, Matrix& dquery,
                     std::span<Matrix> dmemory);

// Single-query form: returns (context, weights). Throws on empty memory.
std::pair<std::vector<double>, std::vector<double>> attention_step(
    std::span<const double> query, std::span<const std::vector<double>> memory);

struct ClipResult {
  double scale = 1.0;
  double global_norm = 0.0;
};

// Rescales every gradient by max_norm / norm when norm exceeds max_norm.
ClipResult clip_global_norm(std::span<ParamTensor* const> params, double max_norm);

// value -= lr * grad, then grad = 0.
void sgd_step(std::span<ParamTensor* const> params, double lr);

struct GradCheckOptions {
  double epsilon = 1e-5;
  // Entries checked per tensor; 0 checks every entry.
  std::size_t samples_per_tensor = 0;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::vector<std::pair<std::string, double>> per_tensor;  // name, max error
  std::size_t entries_checked = 0;
};

// Compares the analytic gradients already stored in params[*].grad against
// central differences of loss_fn. Parameter values are restored afterwards.
GradCheckReport gradient_check(const std::function<double()>& loss_fn,
                               std::span<ParamTensor* const> params,
                               const GradCheckOptions& options = {});

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
  return std::abs(analytic - numeric) / denom;
}

}  // namespace bans::nn

#endif  // BANS_NNKERNEL_HPP_
