// Copyright 2026 The NeSHFS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "neshfs/dataset.hpp"
#include "neshfs/error.hpp"
#include "neshfs/random.hpp"
#include "neshfs/subset.hpp"

namespace neshfs {

enum class ModelKind : std::uint8_t { kLogistic, kFm, kFmMlp };

inline const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLogistic: return "logistic";
    case ModelKind::kFm: return "fm";
    case ModelKind::kFmMlp: return "fm_mlp";
  }
  return "?";
}

inline ModelKind parse_model_kind(const std::string& name) {
  if (name == "logistic") return ModelKind::kLogistic;
  if (name == "fm") return ModelKind::kFm;
  if (name == "fm_mlp") return ModelKind::kFmMlp;
  throw ConfigError("unknown model_kind '" + name + "'");
}

inline constexpr std::size_t kMlpHidden1 = 64;
inline constexpr std::size_t kMlpHidden2 = 32;

/// Numerically stable log(1 + exp(z)).
inline double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Gradient accumulator. The dense block (bias, numerical-field parameters,
/// perceptron) is always live; categorical rows are tracked as touched.
struct Gradient {
  std::vector<double> values;
  std::vector<std::uint8_t> row_touched;  // per global categorical row
  std::vector<std::size_t> touched_rows;

  void reset_rows() {
    for (auto r : touched_rows) row_touched[r] = 0;
    touched_rows.clear();
  }
};

/// CTR model over a fixed feature subset: logistic regression, factorization
/// machine, or factorization machine plus a two-layer perceptron over the
/// concatenated field embeddings.
///
/// Parameters live in one flat vector:
///   [bias][numerical linear][numerical embeddings][perceptron]  dense block
///   per categorical field, per id: [linear][embedding]          row blocks
class CtrModel {
 public:
  CtrModel(ModelKind kind, const EncodedDataset& data,
           const FeatureSubset& subset, std::size_t embedding_dim,
           std::uint64_t seed)
      : kind_(kind),
        data_(&data),
        dim_(kind == ModelKind::kLogistic ? 0 : embedding_dim) {
    if (subset.empty()) throw Error("model: empty feature subset");
    if (kind != ModelKind::kLogistic && embedding_dim == 0) {
      throw ConfigError("model: embedding_dim must be >= 1");
    }
    for (const auto& name : subset.kept_numerical) {
      auto idx = data.numerical_index(name);
      if (!idx) throw Error("model: unknown numerical feature '" + name + "'");
      numerical_cols_.push_back(*idx);
    }
    for (const auto& name : subset.kept_categorical) {
      auto idx = data.categorical_index(name);
      if (!idx) throw Error("model: unknown categorical feature '" + name + "'");
      categorical_cols_.push_back(*idx);
    }
    build_layout();
    initialize(seed);
  }

  ModelKind kind() const { return kind_; }
  std::size_t field_count() const {
    return numerical_cols_.size() + categorical_cols_.size();
  }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  /// Scratch space for one forward/backward pass.
  struct Workspace {
    std::vector<double> embed;   // field_count * dim
    std::vector<double> sum;     // dim
    std::vector<double> hidden1;
    std::vector<double> hidden2;
    std::vector<double> d_embed;
    std::vector<double> d_hidden1;
    std::vector<double> d_hidden2;
  };

  Workspace make_workspace() const {
    Workspace ws;
    ws.embed.assign(field_count() * dim_, 0.0);
    ws.sum.assign(dim_, 0.0);
    ws.d_embed.assign(field_count() * dim_, 0.0);
    if (kind_ == ModelKind::kFmMlp) {
      ws.hidden1.assign(kMlpHidden1, 0.0);
      ws.hidden2.assign(kMlpHidden2, 0.0);
      ws.d_hidden1.assign(kMlpHidden1, 0.0);
      ws.d_hidden2.assign(kMlpHidden2, 0.0);
    }
    return ws;
  }

  Gradient make_gradient() const {
    Gradient g;
    g.values.assign(params_.size(), 0.0);
    g.row_touched.assign(total_rows_, 0);
    return g;
  }

  /// Bias plus first-order terms.
  double linear_logit(std::size_t row) const {
    double z = params_[0];
    for (std::size_t f = 0; f < numerical_cols_.size(); ++f) {
      z += params_[num_linear_ + f] * data_->numerical[numerical_cols_[f]][row];
    }
    for (std::size_t f = 0; f < categorical_cols_.size(); ++f) {
      z += params_[row_offset(f, row)];
    }
    return z;
  }

  double logit(std::size_t row, Workspace& ws) const {
    double z = linear_logit(row);
    if (dim_ == 0) return z;
    const std::size_t p = numerical_cols_.size();

    std::fill(ws.sum.begin(), ws.sum.end(), 0.0);
    double square_sum = 0.0;
    for (std::size_t f = 0; f < field_count(); ++f) {
      const double* src;
      double scale = 1.0;
      if (f < p) {
        src = &params_[num_embed_ + f * dim_];
        scale = data_->numerical[numerical_cols_[f]][row];
      } else {
        src = &params_[row_offset(f - p, row) + 1];
      }
      double* e = &ws.embed[f * dim_];
      for (std::size_t d = 0; d < dim_; ++d) {
        e[d] = scale * src[d];
        ws.sum[d] += e[d];
        square_sum += e[d] * e[d];
      }
    }
    double pairwise = -square_sum;
    for (double s : ws.sum) pairwise += s * s;
    z += 0.5 * pairwise;

    if (kind_ == ModelKind::kFmMlp) z += perceptron_forward(ws);
    return z;
  }

  double predict(std::size_t row) const {
    auto ws = make_workspace();
    return sigmoid(logit(row, ws));
  }

  /// Adds scale * d(logit)/d(theta) into grad. Requires ws from logit(row).
  void accumulate(std::size_t row, double scale, Workspace& ws,
                  Gradient& grad) const {
    auto& g = grad.values;
    g[0] += scale;
    const std::size_t p = numerical_cols_.size();
    for (std::size_t f = 0; f < p; ++f) {
      g[num_linear_ + f] += scale * data_->numerical[numerical_cols_[f]][row];
    }
    for (std::size_t f = 0; f < categorical_cols_.size(); ++f) {
      const std::size_t r = global_row(f, row);
      if (!grad.row_touched[r]) {
        grad.row_touched[r] = 1;
        grad.touched_rows.push_back(r);
      }
      g[row_offset(f, row)] += scale;
    }
    if (dim_ == 0) return;

    // d(pairwise)/d(e_fd) = sum_d - e_fd
    for (std::size_t f = 0; f < field_count(); ++f) {
      for (std::size_t d = 0; d < dim_; ++d) {
        ws.d_embed[f * dim_ + d] = scale * (ws.sum[d] - ws.embed[f * dim_ + d]);
      }
    }
    if (kind_ == ModelKind::kFmMlp) perceptron_backward(scale, ws, g);

    for (std::size_t f = 0; f < field_count(); ++f) {
      const double* de = &ws.d_embed[f * dim_];
      if (f < p) {
        const double x = data_->numerical[numerical_cols_[f]][row];
        double* dst = &g[num_embed_ + f * dim_];
        for (std::size_t d = 0; d < dim_; ++d) dst[d] += x * de[d];
      } else {
        double* dst = &g[row_offset(f - p, row) + 1];
        for (std::size_t d = 0; d < dim_; ++d) dst[d] += de[d];
      }
    }
  }

  /// Mean binary cross-entropy over rows plus l2/2 times the squared norm of
  /// every non-bias parameter the rows touch.
  double objective(std::span<const std::size_t> rows, double l2) const {
    auto ws = make_workspace();
    double loss = 0.0;
    for (auto r : rows) {
      const double z = logit(r, ws);
      loss += softplus(z) - (data_->label[r] ? z : 0.0);
    }
    loss /= static_cast<double>(rows.size());
    if (l2 > 0.0) {
      double norm = 0.0;
      for (std::size_t i = 1; i < dense_size_; ++i) norm += params_[i] * params_[i];
      std::vector<std::uint8_t> seen(total_rows_, 0);
      for (auto r : rows) {
        for (std::size_t f = 0; f < categorical_cols_.size(); ++f) {
          const std::size_t gr = global_row(f, r);
          if (seen[gr]) continue;
          seen[gr] = 1;
          const std::size_t off = row_offset(f, r);
          for (std::size_t k = 0; k < row_width_; ++k) {
            norm += params_[off + k] * params_[off + k];
          }
        }
      }
      loss += 0.5 * l2 * norm;
    }
    return loss;
  }

  /// Gradient of objective(rows, l2) into grad (which must be zeroed, with no
  /// touched rows). Returns the mean cross-entropy of the batch.
  double gradient(std::span<const std::size_t> rows, double l2, Gradient& grad,
                  Workspace& ws) const {
    const double inv = 1.0 / static_cast<double>(rows.size());
    double loss = 0.0;
    for (auto r : rows) {
      const double z = logit(r, ws);
      const double y = data_->label[r] ? 1.0 : 0.0;
      loss += softplus(z) - y * z;
      accumulate(r, (sigmoid(z) - y) * inv, ws, grad);
    }
    if (l2 > 0.0) {
      for (std::size_t i = 1; i < dense_size_; ++i) {
        grad.values[i] += l2 * params_[i];
      }
      for (auto gr : grad.touched_rows) {
        const std::size_t off = row_base(gr);
        for (std::size_t k = 0; k < row_width_; ++k) {
          grad.values[off + k] += l2 * params_[off + k];
        }
      }
    }
    return loss * inv;
  }

  /// theta -= rate * grad, then clears grad.
  void apply(Gradient& grad, double rate) {
    for (std::size_t i = 0; i < dense_size_; ++i) {
      params_[i] -= rate * grad.values[i];
      grad.values[i] = 0.0;
    }
    for (auto gr : grad.touched_rows) {
      const std::size_t off = row_base(gr);
      for (std::size_t k = 0; k < row_width_; ++k) {
        params_[off + k] -= rate * grad.values[off + k];
        grad.values[off + k] = 0.0;
      }
    }
    grad.reset_rows();
  }

  /// Dense gradient of objective(rows, l2), for checking.
  std::vector<double> full_gradient(std::span<const std::size_t> rows,
                                    double l2) const {
    auto grad = make_gradient();
    auto ws = make_workspace();
    gradient(rows, l2, grad, ws);
    return grad.values;
  }

 private:
  void build_layout() {
    const std::size_t p = numerical_cols_.size();
    num_linear_ = 1;
    num_embed_ = num_linear_ + p;
    mlp_ = num_embed_ + p * dim_;
    std::size_t end = mlp_;
    if (kind_ == ModelKind::kFmMlp) {
      const std::size_t in = field_count() * dim_;
      w1_ = mlp_;
      b1_ = w1_ + kMlpHidden1 * in;
      w2_ = b1_ + kMlpHidden1;
      b2_ = w2_ + kMlpHidden2 * kMlpHidden1;
      w3_ = b2_ + kMlpHidden2;
      b3_ = w3_ + kMlpHidden2;
      end = b3_ + 1;
    }
    dense_size_ = end;
    row_width_ = 1 + dim_;
    std::size_t rows = 0;
    for (auto col : categorical_cols_) {
      field_row_start_.push_back(rows);
      rows += data_->vocab_sizes[col];
    }
    total_rows_ = rows;
    params_.assign(dense_size_ + total_rows_ * row_width_, 0.0);
  }

  void initialize(std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t i = num_embed_; i < mlp_; ++i) {
      params_[i] = rng.uniform(-0.01, 0.01);
    }
    for (std::size_t r = 0; r < total_rows_; ++r) {
      for (std::size_t d = 0; d < dim_; ++d) {
        params_[row_base(r) + 1 + d] = rng.uniform(-0.01, 0.01);
      }
    }
    if (kind_ == ModelKind::kFmMlp) {
      const std::size_t in = field_count() * dim_;
      auto glorot = [&](std::size_t at, std::size_t fan_in, std::size_t fan_out) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (std::size_t i = 0; i < fan_in * fan_out; ++i) {
          params_[at + i] = rng.uniform(-limit, limit);
        }
      };
      glorot(w1_, in, kMlpHidden1);
      glorot(w2_, kMlpHidden1, kMlpHidden2);
      glorot(w3_, kMlpHidden2, 1);
    }
  }

  std::size_t global_row(std::size_t cat_field, std::size_t row) const {
    return field_row_start_[cat_field] +
           data_->categorical[categorical_cols_[cat_field]][row];
  }
  std::size_t row_base(std::size_t global) const {
    return dense_size_ + global * row_width_;
  }
  std::size_t row_offset(std::size_t cat_field, std::size_t row) const {
    return row_base(global_row(cat_field, row));
  }

  double perceptron_forward(Workspace& ws) const {
    const std::size_t in = field_count() * dim_;
    for (std::size_t h = 0; h < kMlpHidden1; ++h) {
      double a = params_[b1_ + h];
      const double* w = &params_[w1_ + h * in];
      for (std::size_t i = 0; i < in; ++i) a += w[i] * ws.embed[i];
      ws.hidden1[h] = a > 0.0 ? a : 0.0;
    }
    for (std::size_t h = 0; h < kMlpHidden2; ++h) {
      double a = params_[b2_ + h];
      const double* w = &params_[w2_ + h * kMlpHidden1];
      for (std::size_t i = 0; i < kMlpHidden1; ++i) a += w[i] * ws.hidden1[i];
      ws.hidden2[h] = a > 0.0 ? a : 0.0;
    }
    double out = params_[b3_];
    for (std::size_t h = 0; h < kMlpHidden2; ++h) {
      out += params_[w3_ + h] * ws.hidden2[h];
    }
    return out;
  }

  void perceptron_backward(double scale, Workspace& ws,
                           std::vector<double>& g) const {
    const std::size_t in = field_count() * dim_;
    g[b3_] += scale;
    for (std::size_t h = 0; h < kMlpHidden2; ++h) {
      g[w3_ + h] += scale * ws.hidden2[h];
      ws.d_hidden2[h] = ws.hidden2[h] > 0.0 ? scale * params_[w3_ + h] : 0.0;
    }
    std::fill(ws.d_hidden1.begin(), ws.d_hidden1.end(), 0.0);
    for (std::size_t h = 0; h < kMlpHidden2; ++h) {
      const double dh = ws.d_hidden2[h];
      if (dh == 0.0) continue;
      g[b2_ + h] += dh;
      const double* w = &params_[w2_ + h * kMlpHidden1];
      double* gw = &g[w2_ + h * kMlpHidden1];
      for (std::size_t i = 0; i < kMlpHidden1; ++i) {
        gw[i] += dh * ws.hidden1[i];
        ws.d_hidden1[i] += dh * w[i];
      }
    }
    for (std::size_t h = 0; h < kMlpHidden1; ++h) {
      const double dh = ws.hidden1[h] > 0.0 ? ws.d_hidden1[h] : 0.0;
      if (dh == 0.0) continue;
      g[b1_ + h] += dh;
      const double* w = &params_[w1_ + h * in];
      double* gw = &g[w1_ + h * in];
      for (std::size_t i = 0; i < in; ++i) {
        gw[i] += dh * ws.embed[i];
        ws.d_embed[i] += dh * w[i];
      }
    }
  }

  ModelKind kind_;
  const EncodedDataset* data_;
  std::size_t dim_;
  std::vector<std::size_t> numerical_cols_;
  std::vector<std::size_t> categorical_cols_;
  std::vector<std::size_t> field_row_start_;
  std::size_t total_rows_ = 0;
  std::size_t row_width_ = 1;
  std::size_t dense_size_ = 0;
  std::size_t num_linear_ = 0, num_embed_ = 0, mlp_ = 0;
  std::size_t w1_ = 0, b1_ = 0, w2_ = 0, b2_ = 0, w3_ = 0, b3_ = 0;
  std::vector<double> params_;
};

/// Explicit sum over field pairs of <v_i, v_j>; reference for the
/// square-of-sums form used by CtrModel.
inline double pairwise_interaction_naive(std::span<const double> embeddings,
                                         std::size_t dim) {
  const std::size_t fields = embeddings.size() / dim;
  double total = 0.0;
  for (std::size_t a = 0; a < fields; ++a) {
    for (std::size_t b = a + 1; b < fields; ++b) {
      for (std::size_t d = 0; d < dim; ++d) {
        total += embeddings[a * dim + d] * embeddings[b * dim + d];
      }
    }
  }
  return total;
}

/// 0.5 * sum_d [(sum_f v_fd)^2 - sum_f v_fd^2].
inline double pairwise_interaction(std::span<const double> embeddings,
                                   std::size_t dim) {
  const std::size_t fields = embeddings.size() / dim;
  double total = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    double sum = 0.0, squares = 0.0;
    for (std::size_t f = 0; f < fields; ++f) {
      const double v = embeddings[f * dim + d];
      sum += v;
      squares += v * v;
    }
    total += sum * sum - squares;
  }
  return 0.5 * total;
}

}  // namespace neshfs
