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

#include "bans/nnkernel.hpp"

#include <limits>
#include <numeric>

#include "bans/error.hpp"

namespace bans::nn {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require(bool ok, const char* what) {
  if (!ok) throw Error(std::string("shape mismatch: ") + what);
}

}  // namespace

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "matmul_nt");
  Matrix out(a.rows(), b.rows());
  const std::size_t k = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ar = a.row(i).data();
    double* orow = out.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* br = b.row(j).data();
      double s = 0.0;
      for (std::size_t x = 0; x < k; ++x) s += ar[x] * br[x];
      orow[j] = s;
    }
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* orow = out.row(i).data();
    for (std::size_t x = 0; x < a.cols(); ++x) {
      const double av = a(i, x);
      const double* br = b.row(x).data();
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += av * br[j];
    }
  }
  return out;
}

void add_matmul_tn(Matrix& acc, const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && acc.rows() == a.cols() && acc.cols() == b.cols(),
          "add_matmul_tn");
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* br = b.row(r).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double av = a(r, i);
      if (av == 0.0) continue;
      double* accrow = acc.row(i).data();
      for (std::size_t j = 0; j < b.cols(); ++j) accrow[j] += av * br[j];
    }
  }
}

void add_row_bias(Matrix& m, const Matrix& bias) {
  require(bias.rows() == 1 && bias.cols() == m.cols(), "add_row_bias");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) row[c] += bias(0, c);
  }
}

void add_column_sums(Matrix& acc, const Matrix& m) {
  require(acc.rows() == 1 && acc.cols() == m.cols(), "add_column_sums");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) acc(0, c) += m(r, c);
  }
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "hconcat");
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = out.row(r);
    std::copy(a.row(r).begin(), a.row(r).end(), dst.begin());
    std::copy(b.row(r).begin(), b.row(r).end(), dst.begin() + static_cast<long>(a.cols()));
  }
  return out;
}

Matrix slice_cols(const Matrix& m, std::size_t begin, std::size_t count) {
  require(begin + count <= m.cols(), "slice_cols");
  Matrix out(m.rows(), count);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < count; ++c) out(r, c) = m(r, begin + c);
  }
  return out;
}

void add_in_place(Matrix& acc, const Matrix& m) {
  require(acc.same_shape(m), "add_in_place");
  auto a = acc.data();
  auto b = m.data();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

Matrix init_uniform(std::size_t rows, std::size_t cols, double scale, Rng& rng) {
  if (!(scale > 0.0)) throw Error("init scale must be > 0");
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-scale, scale);
  return m;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto in = logits.row(r);
    auto dst = out.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      dst[c] = std::exp(in[c] - mx);
      sum += dst[c];
    }
    for (double& v : dst) v /= sum;
  }
  return out;
}

CrossEntropy cross_entropy(const Matrix& logits, std::span<const std::int32_t> targets,
                           std::span<const double> weights) {
  require(targets.size() == logits.rows() && weights.size() == logits.rows(),
          "cross_entropy");
  double total_weight = 0.0;
  for (const double w : weights) total_weight += w;
  if (total_weight == 0.0) throw Error("no weighted targets");

  CrossEntropy out;
  out.dlogits = Matrix(logits.rows(), logits.cols());
  double loss = 0.0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const double w = weights[r];
    if (w == 0.0) continue;
    const auto t = static_cast<std::size_t>(targets[r]);
    if (targets[r] < 0 || t >= logits.cols()) throw Error("target id out of range");
    const auto in = logits.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (const double v : in) sum += std::exp(v - mx);
    const double log_z = mx + std::log(sum);
    loss += w * (log_z - in[t]);
    auto d = out.dlogits.row(r);
    const double scale = w / total_weight;
    for (std::size_t c = 0; c < in.size(); ++c) d[c] = scale * std::exp(in[c] - log_z);
    d[t] -= scale;
  }
  out.loss = loss / total_weight;
  return out;
}

LstmParams::LstmParams(const std::string& prefix, std::size_t in, std::size_t hidden)
    : input_dim(in),
      hidden_dim(hidden),
      w(prefix + ".w", Matrix(4 * hidden, in)),
      u(prefix + ".u", Matrix(4 * hidden, hidden)),
      b(prefix + ".b", Matrix(1, 4 * hidden)) {}

LstmStep lstm_cell_forward(const Matrix& x, const LstmState& state, const LstmParams& p) {
  const std::size_t hd = p.hidden_dim;
  require(x.cols() == p.input_dim, "lstm input dim");
  require(state.h.cols() == hd && state.c.cols() == hd, "lstm state dim");
  require(state.h.rows() == x.rows() && state.c.rows() == x.rows(), "lstm batch");
  require(p.w.value.rows() == 4 * hd && p.w.value.cols() == p.input_dim &&
              p.u.value.rows() == 4 * hd && p.u.value.cols() == hd &&
              p.b.value.rows() == 1 && p.b.value.cols() == 4 * hd,
          "lstm params");

  Matrix pre = matmul_nt(x, p.w.value);
  add_in_place(pre, matmul_nt(state.h, p.u.value));
  add_row_bias(pre, p.b.value);

  const std::size_t n = x.rows();
  LstmStep step;
  LstmCache& k = step.cache;
  k.x = x;
  k.h_prev = state.h;
  k.c_prev = state.c;
  k.i = k.f = k.o = k.g = k.c = k.tanh_c = Matrix(n, hd);
  step.state.h = Matrix(n, hd);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < hd; ++j) {
      const double i = sigmoid(pre(r, j));
      const double f = sigmoid(pre(r, hd + j));
      const double o = sigmoid(pre(r, 2 * hd + j));
      const double g = std::tanh(pre(r, 3 * hd + j));
      const double c = f * state.c(r, j) + i * g;
      const double tc = std::tanh(c);
      k.i(r, j) = i;
      k.f(r, j) = f;
      k.o(r, j) = o;
      k.g(r, j) = g;
      k.c(r, j) = c;
      k.tanh_c(r, j) = tc;
      step.state.h(r, j) = o * tc;
    }
  }
  step.state.c = k.c;
  return step;
}

LstmBackward lstm_cell_backward(const LstmCache& k, const Matrix& dh, const Matrix& dc,
                                LstmParams& p) {
  const std::size_t hd = p.hidden_dim;
  const std::size_t n = k.x.rows();
  require(dh.rows() == n && dh.cols() == hd && dc.same_shape(dh), "lstm backward");

  Matrix dpre(n, 4 * hd);
  LstmBackward out;
  out.dc_prev = Matrix(n, hd);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < hd; ++j) {
      const double i = k.i(r, j), f = k.f(r, j), o = k.o(r, j), g = k.g(r, j);
      const double tc = k.tanh_c(r, j);
      const double d_o = dh(r, j) * tc;
      const double d_c = dc(r, j) + dh(r, j) * o * (1.0 - tc * tc);
      dpre(r, j) = d_c * g * i * (1.0 - i);
      dpre(r, hd + j) = d_c * k.c_prev(r, j) * f * (1.0 - f);
      dpre(r, 2 * hd + j) = d_o * o * (1.0 - o);
      dpre(r, 3 * hd + j) = d_c * i * (1.0 - g * g);
      out.dc_prev(r, j) = d_c * f;
    }
  }
  add_matmul_tn(p.w.grad, dpre, k.x);
  add_matmul_tn(p.u.grad, dpre, k.h_prev);
  add_column_sums(p.b.grad, dpre);
  out.dx = matmul(dpre, p.w.value);
  out.dh_prev = matmul(dpre, p.u.value);
  return out;
}

Attention attend(const Matrix& query, std::span<const Matrix> memory, const Matrix& mask) {
  const std::size_t n = query.rows();
  const std::size_t steps = memory.size();
  require(mask.rows() == n && mask.cols() == steps, "attention mask");
  for (const auto& m : memory) require(m.same_shape(query), "attention memory");

  Attention out{Matrix(n, query.cols()), Matrix(n, steps)};
  std::vector<double> scores(steps);
  for (std::size_t r = 0; r < n; ++r) {
    const auto q = query.row(r);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < steps; ++s) {
      if (mask(r, s) == 0.0) continue;
      const auto m = memory[s].row(r);
      double e = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) e += q[j] * m[j];
      scores[s] = e;
      mx = std::max(mx, e);
    }
    if (mx == -std::numeric_limits<double>::infinity()) continue;
    double sum = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      if (mask(r, s) == 0.0) continue;
      out.weights(r, s) = std::exp(scores[s] - mx);
      sum += out.weights(r, s);
    }
    auto ctx = out.context.row(r);
    for (std::size_t s = 0; s < steps; ++s) {
      if (mask(r, s) == 0.0) continue;
      const double a = out.weights(r, s) /= sum;
      const auto m = memory[s].row(r);
      for (std::size_t j = 0; j < ctx.size(); ++j) ctx[j] += a * m[j];
    }
  }
  return out;
}

void attend_backward(const Matrix& query, std::span<const Matrix> memory,
                     const Attention& fwd, const Matrix& dcontext, Matrix& dquery,
                     std::span<Matrix> dmemory) {
  const std::size_t n = query.rows();
  const std::size_t steps = memory.size();
  require(dcontext.same_shape(query) && dquery.same_shape(query) && dmemory.size() == steps,
          "attention backward");
  std::vector<double> da(steps);
  for (std::size_t r = 0; r < n; ++r) {
    const auto dctx = dcontext.row(r);
    const auto q = query.row(r);
    double dot = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const double a = fwd.weights(r, s);
      if (a == 0.0) {
        da[s] = 0.0;
        continue;
      }
      const auto m = memory[s].row(r);
      double v = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) v += dctx[j] * m[j];
      da[s] = v;
      dot += a * v;
    }
    auto dq = dquery.row(r);
    for (std::size_t s = 0; s < steps; ++s) {
      const double a = fwd.weights(r, s);
      if (a == 0.0) continue;
      const double de = a * (da[s] - dot);
      const auto m = memory[s].row(r);
      auto dm = dmemory[s].row(r);
      for (std::size_t j = 0; j < q.size(); ++j) {
        dm[j] += a * dctx[j] + de * q[j];
        dq[j] += de * m[j];
      }
    }
  }
}

std::pair<std::vector<double>, std::vector<double>> attention_step(
    std::span<const double> query, std::span<const std::vector<double>> memory) {
  if (memory.empty()) throw Error("attention over empty memory");
  Matrix q(1, query.size());
  std::copy(query.begin(), query.end(), q.data().begin());
  std::vector<Matrix> mem;
  mem.reserve(memory.size());
  for (const auto& m : memory) {
    require(m.size() == query.size(), "attention memory dim");
    Matrix row(1, m.size());
    std::copy(m.begin(), m.end(), row.data().begin());
    mem.push_back(std::move(row));
  }
  const Attention a = attend(q, mem, Matrix(1, memory.size(), 1.0));
  return {std::vector<double>(a.context.data().begin(), a.context.data().end()),
          std::vector<double>(a.weights.data().begin(), a.weights.data().end())};
}

ClipResult clip_global_norm(std::span<ParamTensor* const> params, double max_norm) {
  if (!(max_norm > 0.0)) throw Error("max_norm must be > 0");
  double sq = 0.0;
  for (const ParamTensor* p : params) {
    for (const double g : p->grad.data()) sq += g * g;
  }
  ClipResult out;
  out.global_norm = std::sqrt(sq);
  if (out.global_norm > max_norm) {
    out.scale = max_norm / out.global_norm;
    for (ParamTensor* p : params) {
      for (double& g : p->grad.data()) g *= out.scale;
    }
  }
  return out;
}

void sgd_step(std::span<ParamTensor* const> params, double lr) {
  for (ParamTensor* p : params) {
    auto v = p->value.data();
    auto g = p->grad.data();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
    p->zero_grad();
  }
}

GradCheckReport gradient_check(const std::function<double()>& loss_fn,
                               std::span<ParamTensor* const> params,
                               const GradCheckOptions& options) {
  GradCheckReport report;
  Rng rng(options.seed);
  const double eps = options.epsilon;
  for (ParamTensor* p : params) {
    const std::size_t n = p->value.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::size_t count = n;
    if (options.samples_per_tensor > 0 && options.samples_per_tensor < n) {
      count = options.samples_per_tensor;
      for (std::size_t i = 0; i < count; ++i) {
        std::swap(idx[i], idx[i + rng.below(n - i)]);
      }
    }
    double worst = 0.0;
    auto values = p->value.data();
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t i = idx[k];
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = loss_fn();
      values[i] = saved - eps;
      const double down = loss_fn();
      values[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) throw Error("non-finite loss");
      const double numeric = (up - down) / (2.0 * eps);
      worst = std::max(worst, relative_error(p->grad.data()[i], numeric));
    }
    report.per_tensor.emplace_back(p->name, worst);
    report.max_relative_error = std::max(report.max_relative_error, worst);
    report.entries_checked += count;
  }
  return report;
}

}  // namespace bans::nn
