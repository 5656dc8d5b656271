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

#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <vector>

#include "neshfs/error.hpp"

namespace neshfs {

/// What fit_with_early_stopping drives. train_epoch runs one pass and
/// returns the mean training loss; save_best/restore_best snapshot and
/// reinstate the parameters of the best epoch.
template <class T>
concept EpochTrainer = requires(T t, std::size_t epoch) {
  { t.train_epoch(epoch) } -> std::convertible_to<double>;
  { t.validation_loss() } -> std::convertible_to<double>;
  t.save_best();
  t.restore_best();
};

struct FitSummary {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;  // 1-based
  double best_validation_loss = std::numeric_limits<double>::infinity();
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
};

/// Trains until the validation loss has not strictly decreased for
/// `patience` consecutive epochs, or max_epochs is reached, then restores the
/// best epoch's parameters.
template <EpochTrainer Trainer>
FitSummary fit_with_early_stopping(Trainer& trainer, std::size_t patience,
                                   std::size_t max_epochs) {
  if (patience == 0) throw ConfigError("patience must be >= 1");
  if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
  FitSummary summary;
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= max_epochs; ++epoch) {
    const double train = trainer.train_epoch(epoch);
    if (!std::isfinite(train)) throw DivergenceError(epoch, "training loss");
    const double val = trainer.validation_loss();
    if (!std::isfinite(val)) throw DivergenceError(epoch, "validation loss");
    summary.epochs_run = epoch;
    summary.train_loss.push_back(train);
    summary.validation_loss.push_back(val);
    if (val < summary.best_validation_loss) {
      summary.best_validation_loss = val;
      summary.best_epoch = epoch;
      stale = 0;
      trainer.save_best();
    } else if (++stale >= patience) {
      break;
    }
  }
  trainer.restore_best();
  return summary;
}

}  // namespace neshfs
