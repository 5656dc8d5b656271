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
#include <numeric>
#include <span>
#include <vector>

#include "neshfs/error.hpp"

namespace neshfs {

inline constexpr double kLoglossEpsilon = 1e-7;

/// Area under the ROC curve as the Mann-Whitney statistic: the fraction of
/// positive/negative pairs where the positive scores higher, ties counting
/// one half. Uses mid-ranks, O(n log n).
template <class Score, class Label>
double auc(std::span<const Score> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) {
    throw Error("auc: scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Twice the positive rank sum keeps mid-ranks integral.
  std::uint64_t positives = 0;
  std::uint64_t twice_rank_sum = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1..j share the mid-rank (i+1+j)/2.
    const std::uint64_t twice_mid = i + 1 + j;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        ++positives;
        twice_rank_sum += twice_mid;
      }
    }
    i = j;
  }
  const std::uint64_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw Error("auc: need at least one positive and one negative label");
  }
  // 2U = 2R - n1(n1+1); dividing by 2 is exact in binary.
  const std::uint64_t twice_u = twice_rank_sum - positives * (positives + 1);
  return (static_cast<double>(twice_u) / 2.0) /
         static_cast<double>(positives * negatives);
}

template <class Score, class Label>
double auc(const std::vector<Score>& scores, const std::vector<Label>& labels) {
  return auc(std::span<const Score>(scores), std::span<const Label>(labels));
}

/// Mean binary cross-entropy with predictions clipped to [1e-7, 1 - 1e-7].
template <class Label>
double logloss(std::span<const double> predictions,
               std::span<const Label> labels) {
  if (predictions.size() != labels.size()) {
    throw Error("logloss: predictions and labels differ in length");
  }
  if (predictions.empty()) throw Error("logloss: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double p =
        std::clamp(predictions[i], kLoglossEpsilon, 1.0 - kLoglossEpsilon);
    total -= labels[i] ? std::log(p) : std::log1p(-p);
  }
  return total / static_cast<double>(predictions.size());
}

template <class Label>
double logloss(const std::vector<double>& predictions,
               const std::vector<Label>& labels) {
  return logloss(std::span<const double>(predictions),
                 std::span<const Label>(labels));
}

}  // namespace neshfs
