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
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "neshfs/dataset.hpp"
#include "neshfs/error.hpp"

namespace neshfs {

/// Stands in for an infinite F statistic (perfect class separation).
inline constexpr double kPerfectSeparationScore =
    std::numeric_limits<double>::max();

struct FeatureScore {
  std::string name;
  FeatureKind kind = FeatureKind::kNumerical;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based within kind
};

/// Score-descending feature lists, one per kind.
struct RankedFeatures {
  std::vector<FeatureScore> numerical;
  std::vector<FeatureScore> categorical;

  std::size_t total() const { return numerical.size() + categorical.size(); }

  const std::vector<FeatureScore>& of(FeatureKind kind) const {
    return kind == FeatureKind::kNumerical ? numerical : categorical;
  }

  /// Builds a ranking from names already in score order (scores descend from
  /// the list length). Handy when scores come from elsewhere.
  static RankedFeatures from_order(const std::vector<std::string>& numerical,
                                   const std::vector<std::string>& categorical) {
    RankedFeatures ranked;
    auto fill = [](const std::vector<std::string>& names, FeatureKind kind,
                   std::vector<FeatureScore>& out) {
      for (std::size_t i = 0; i < names.size(); ++i) {
        out.push_back({names[i], kind, static_cast<double>(names.size() - i),
                       i + 1});
      }
    };
    fill(numerical, FeatureKind::kNumerical, ranked.numerical);
    fill(categorical, FeatureKind::kCategorical, ranked.categorical);
    return ranked;
  }
};

/// Pearson chi-square statistic of the value x label contingency table.
/// Returns 0 for a table with a single row or a single column.
template <class Label>
double chi_square_score(std::span<const std::uint32_t> column,
                        std::span<const Label> labels) {
  if (column.size() != labels.size()) {
    throw Error("chi_square_score: column and labels differ in length");
  }
  if (column.empty()) throw Error("chi_square_score: empty input");

  const std::uint32_t width = *std::max_element(column.begin(), column.end()) + 1;
  std::vector<std::uint64_t> count(width, 0), positive(width, 0);
  std::uint64_t total_positive = 0;
  for (std::size_t r = 0; r < column.size(); ++r) {
    ++count[column[r]];
    if (labels[r]) {
      ++positive[column[r]];
      ++total_positive;
    }
  }
  const auto n = static_cast<double>(column.size());
  const auto n1 = static_cast<double>(total_positive);
  const double n0 = n - n1;
  const auto rows = std::count_if(count.begin(), count.end(),
                                  [](std::uint64_t c) { return c > 0; });
  if (rows < 2 || n1 == 0.0 || n0 == 0.0) return 0.0;

  double stat = 0.0;
  for (std::uint32_t v = 0; v < width; ++v) {
    if (count[v] == 0) continue;
    const auto row = static_cast<double>(count[v]);
    const auto o1 = static_cast<double>(positive[v]);
    const double o0 = row - o1;
    const double e1 = row * n1 / n;
    const double e0 = row * n0 / n;
    stat += (o1 - e1) * (o1 - e1) / e1 + (o0 - e0) * (o0 - e0) / e0;
  }
  return stat;
}

/// One-way ANOVA F statistic between the two label groups.
///
/// Returns 0 when the group means coincide and kPerfectSeparationScore when
/// the groups differ but have no within-group spread.
template <class Label>
double anova_f_score(std::span<const double> column,
                     std::span<const Label> labels) {
  if (column.size() != labels.size()) {
    throw Error("anova_f_score: column and labels differ in length");
  }
  if (column.size() < 3) throw Error("anova_f_score: need at least 3 rows");

  double sum[2] = {0.0, 0.0};
  std::size_t size[2] = {0, 0};
  for (std::size_t r = 0; r < column.size(); ++r) {
    const int g = labels[r] ? 1 : 0;
    sum[g] += column[r];
    ++size[g];
  }
  if (size[0] == 0 || size[1] == 0) {
    throw Error("anova_f_score: both label classes must be present");
  }
  const double mean[2] = {sum[0] / static_cast<double>(size[0]),
                          sum[1] / static_cast<double>(size[1])};
  double within = 0.0;
  for (std::size_t r = 0; r < column.size(); ++r) {
    const double dev = column[r] - mean[labels[r] ? 1 : 0];
    within += dev * dev;
  }
  // With two groups, SSB = n0 n1 / n * (mean1 - mean0)^2.
  const double n = static_cast<double>(column.size());
  const double gap = mean[1] - mean[0];
  const double between =
      static_cast<double>(size[0]) * static_cast<double>(size[1]) / n * gap * gap;
  if (between == 0.0) return 0.0;
  if (within == 0.0) return kPerfectSeparationScore;
  const double f = between / (within / (n - 2.0));
  return std::isfinite(f) ? f : kPerfectSeparationScore;
}

namespace detail {

inline void sort_and_rank(std::vector<FeatureScore>& scores) {
  std::sort(scores.begin(), scores.end(),
            [](const FeatureScore& a, const FeatureScore& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.name < b.name;
            });
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i].rank = i + 1;
}

}  // namespace detail

/// Orders already-computed scores descending, ties by ascending name.
inline RankedFeatures rank_scores(std::vector<FeatureScore> numerical,
                                  std::vector<FeatureScore> categorical) {
  detail::sort_and_rank(numerical);
  detail::sort_and_rank(categorical);
  return {std::move(numerical), std::move(categorical)};
}

/// Scores every feature on the training rows and ranks each kind.
inline RankedFeatures rank_features(const EncodedDataset& dataset) {
  const auto rows = dataset.rows_in(Split::kTrain);
  std::vector<std::uint8_t> labels;
  labels.reserve(rows.size());
  for (auto r : rows) labels.push_back(dataset.label[r]);

  std::vector<FeatureScore> numerical, categorical;
  std::vector<double> dense(rows.size());
  for (std::size_t f = 0; f < dataset.numerical.size(); ++f) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      dense[i] = dataset.numerical[f][rows[i]];
    }
    numerical.push_back({dataset.numerical_names[f], FeatureKind::kNumerical,
                         anova_f_score(std::span<const double>(dense),
                                       std::span<const std::uint8_t>(labels)),
                         0});
  }
  std::vector<std::uint32_t> ids(rows.size());
  for (std::size_t f = 0; f < dataset.categorical.size(); ++f) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ids[i] = dataset.categorical[f][rows[i]];
    }
    categorical.push_back(
        {dataset.categorical_names[f], FeatureKind::kCategorical,
         chi_square_score(std::span<const std::uint32_t>(ids),
                          std::span<const std::uint8_t>(labels)),
         0});
  }
  return rank_scores(std::move(numerical), std::move(categorical));
}

inline RankedFeatures rank_features(const EncodedDataset& dataset,
                                    const FeatureSchema& schema) {
  if (dataset.numerical_names != schema.numerical ||
      dataset.categorical_names != schema.categorical) {
    throw SchemaError("rank_features: dataset was not encoded under this schema");
  }
  return rank_features(dataset);
}

/// Ranking report: kind,rank,feature,score.
inline void write_ranking_csv(std::ostream& out, const RankedFeatures& ranked) {
  out << "kind,rank,feature,score\n";
  auto emit = [&](const std::vector<FeatureScore>& list) {
    char buf[64];
    for (const auto& s : list) {
      std::snprintf(buf, sizeof buf, "%.10g", s.score);
      out << to_string(s.kind) << ',' << s.rank << ',' << csv::escape(s.name)
          << ',' << buf << '\n';
    }
  };
  emit(ranked.numerical);
  emit(ranked.categorical);
}

}  // namespace neshfs
