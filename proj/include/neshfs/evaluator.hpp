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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "neshfs/dataset.hpp"
#include "neshfs/early_stopping.hpp"
#include "neshfs/error.hpp"
#include "neshfs/ledger.hpp"
#include "neshfs/metrics.hpp"
#include "neshfs/model.hpp"
#include "neshfs/random.hpp"
#include "neshfs/subset.hpp"

namespace neshfs {

struct TrainConfig {
  std::size_t batch_size = 256;
  std::size_t patience = 3;
  std::size_t max_epochs = 50;
  double learning_rate = 1e-3;
  std::size_t embedding_dim = 8;
  double l2 = 1e-6;
  std::uint64_t seed = 0;
  ModelKind model_kind = ModelKind::kFm;
  // When false, wall times and timestamps are recorded as zero/empty so that
  // repeated runs emit identical files.
  bool record_wall_time = true;

  void validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (embedding_dim < 1) throw ConfigError("embedding_dim must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (!(l2 >= 0.0)) throw ConfigError("l2 must be >= 0");
  }
};

/// Mini-batch SGD over one CtrModel, in the shape fit_with_early_stopping
/// expects.
class SgdTrainer {
 public:
  SgdTrainer(CtrModel& model, const EncodedDataset& data,
             const TrainConfig& config)
      : model_(model),
        data_(data),
        config_(config),
        train_rows_(data.rows_in(Split::kTrain)),
        val_rows_(data.rows_in(Split::kVal)),
        grad_(model.make_gradient()),
        ws_(model.make_workspace()) {
    save_best();
  }

  double train_epoch(std::size_t epoch) {
    Rng rng(derive_seed(config_.seed, epoch));
    rng.shuffle(std::span<std::size_t>(train_rows_));
    const std::span<const std::size_t> rows(train_rows_);
    double total = 0.0;
    for (std::size_t start = 0; start < rows.size(); start += config_.batch_size) {
      const auto batch =
          rows.subspan(start, std::min(config_.batch_size, rows.size() - start));
      const double loss = model_.gradient(batch, config_.l2, grad_, ws_);
      if (!std::isfinite(loss)) throw DivergenceError(epoch, "batch loss");
      total += loss * static_cast<double>(batch.size());
      model_.apply(grad_, config_.learning_rate);
    }
    return total / static_cast<double>(rows.size());
  }

  double validation_loss() const { return logloss_on(val_rows_); }

  void save_best() {
    auto p = model_.parameters();
    best_.assign(p.begin(), p.end());
  }

  void restore_best() { std::copy(best_.begin(), best_.end(), model_.parameters().begin()); }

  std::vector<double> predict(std::span<const std::size_t> rows) const {
    std::vector<double> pred;
    pred.reserve(rows.size());
    auto ws = model_.make_workspace();
    for (auto r : rows) pred.push_back(sigmoid(model_.logit(r, ws)));
    return pred;
  }

  std::vector<std::uint8_t> labels(std::span<const std::size_t> rows) const {
    std::vector<std::uint8_t> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(data_.label[r]);
    return out;
  }

  double logloss_on(std::span<const std::size_t> rows) const {
    return logloss(predict(rows), labels(rows));
  }

 private:
  CtrModel& model_;
  const EncodedDataset& data_;
  TrainConfig config_;
  std::vector<std::size_t> train_rows_;
  std::vector<std::size_t> val_rows_;
  Gradient grad_;
  CtrModel::Workspace ws_;
  std::vector<double> best_;
};

/// Trains the configured model on the subset's features and scores the test
/// split with the best-validation parameters. Reported time covers training
/// and test evaluation.
inline EvalRecord train_and_eval(const FeatureSubset& subset,
                                 const EncodedDataset& data,
                                 const TrainConfig& config) {
  config.validate();
  if (subset.empty()) throw Error("train_and_eval: empty feature subset");
  const auto started = std::chrono::steady_clock::now();
  const auto test_rows = data.rows_in(Split::kTest);
  if (test_rows.empty() || data.rows_in(Split::kTrain).empty() ||
      data.rows_in(Split::kVal).empty()) {
    throw DataError("train_and_eval: every split must be non-empty");
  }

  CtrModel model(config.model_kind, data, subset, config.embedding_dim,
                 derive_seed(config.seed, 0x494e4954));
  SgdTrainer trainer(model, data, config);
  const auto fit =
      fit_with_early_stopping(trainer, config.patience, config.max_epochs);

  const auto pred = trainer.predict(test_rows);
  const auto labels = trainer.labels(test_rows);
  EvalRecord record = EvalRecord::for_subset(subset);
  record.auc = auc(pred, labels);
  record.logloss = logloss(pred, labels);
  record.epochs_run = fit.epochs_run;
  if (config.record_wall_time) {
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - started;
    record.train_time_s = std::round(elapsed.count() * 1000.0) / 1000.0;
    record.timestamp = utc_timestamp();
  }
  return record;
}

/// train_and_eval bound to a dataset and configuration; the evaluator the
/// search and GA call.
class CtrEvaluator {
 public:
  CtrEvaluator(const EncodedDataset& data, TrainConfig config)
      : data_(&data), config_(std::move(config)) {}

  EvalRecord operator()(const FeatureSubset& subset) const {
    return train_and_eval(subset, *data_, config_);
  }

  const TrainConfig& config() const { return config_; }

 private:
  const EncodedDataset* data_;
  TrainConfig config_;
};

}  // namespace neshfs
