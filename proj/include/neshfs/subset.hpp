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
#include <set>
#include <string>
#include <vector>

#include "neshfs/error.hpp"
#include "neshfs/scoring.hpp"

namespace neshfs {

inline constexpr char kKeySeparator = '|';

/// Canonical identifier of a feature set: sorted names joined by '|'.
inline std::string canonical_key(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  std::string key;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) key.push_back(kKeySeparator);
    key += names[i];
  }
  return key;
}

/// A feature set as the search manipulates it.
///
/// Kept lists are in ranked (score-descending) order. Removed lists are in
/// removal order, so their back is the most recently removed feature; for
/// subsets built by the engine that is also the best-scored removed one.
struct FeatureSubset {
  std::vector<std::string> kept_numerical;
  std::vector<std::string> kept_categorical;
  std::vector<std::string> removed_numerical;
  std::vector<std::string> removed_categorical;

  std::size_t size() const {
    return kept_numerical.size() + kept_categorical.size();
  }
  bool empty() const { return size() == 0; }

  std::vector<std::string> kept() const {
    std::vector<std::string> names = kept_numerical;
    names.insert(names.end(), kept_categorical.begin(), kept_categorical.end());
    return names;
  }

  std::string key() const { return canonical_key(kept()); }

  /// The top n_numerical / n_categorical features of each ranked list, with
  /// the rest removed lowest-score first.
  static FeatureSubset prefix(const RankedFeatures& ranked,
                              std::size_t n_numerical,
                              std::size_t n_categorical) {
    if (n_numerical > ranked.numerical.size() ||
        n_categorical > ranked.categorical.size()) {
      throw Error("FeatureSubset::prefix: count exceeds ranked list");
    }
    FeatureSubset s;
    auto fill = [](const std::vector<FeatureScore>& list, std::size_t n,
                   std::vector<std::string>& kept,
                   std::vector<std::string>& removed) {
      for (std::size_t i = 0; i < n; ++i) kept.push_back(list[i].name);
      for (std::size_t i = list.size(); i > n; --i) {
        removed.push_back(list[i - 1].name);
      }
    };
    fill(ranked.numerical, n_numerical, s.kept_numerical, s.removed_numerical);
    fill(ranked.categorical, n_categorical, s.kept_categorical,
         s.removed_categorical);
    return s;
  }

  static FeatureSubset full(const RankedFeatures& ranked) {
    return prefix(ranked, ranked.numerical.size(), ranked.categorical.size());
  }

  /// Arbitrary subset over the ranked features; mask is indexed numerical
  /// first, then categorical, each in ranked order.
  static FeatureSubset from_mask(const RankedFeatures& ranked,
                                 const std::vector<bool>& mask) {
    if (mask.size() != ranked.total()) {
      throw Error("FeatureSubset::from_mask: mask length mismatch");
    }
    FeatureSubset s;
    const std::size_t p = ranked.numerical.size();
    for (std::size_t i = 0; i < p; ++i) {
      if (mask[i]) s.kept_numerical.push_back(ranked.numerical[i].name);
    }
    for (std::size_t i = p; i > 0; --i) {
      if (!mask[i - 1]) s.removed_numerical.push_back(ranked.numerical[i - 1].name);
    }
    for (std::size_t i = 0; i < ranked.categorical.size(); ++i) {
      if (mask[p + i]) s.kept_categorical.push_back(ranked.categorical[i].name);
    }
    for (std::size_t i = ranked.categorical.size(); i > 0; --i) {
      if (!mask[p + i - 1]) {
        s.removed_categorical.push_back(ranked.categorical[i - 1].name);
      }
    }
    return s;
  }

  /// Rebuilds a subset from kept feature names (as stored in a ledger).
  static FeatureSubset from_names(const RankedFeatures& ranked,
                                  const std::vector<std::string>& names) {
    const std::set<std::string> wanted(names.begin(), names.end());
    std::vector<bool> mask;
    for (const auto& f : ranked.numerical) mask.push_back(wanted.count(f.name) > 0);
    for (const auto& f : ranked.categorical) mask.push_back(wanted.count(f.name) > 0);
    auto subset = from_mask(ranked, mask);
    if (subset.size() != wanted.size()) {
      throw Error("FeatureSubset::from_names: unknown feature name");
    }
    return subset;
  }

  /// True when each kept list is a prefix of its ranked list and the removed
  /// lists hold exactly the remaining features.
  bool is_prefix_of(const RankedFeatures& ranked) const {
    auto check = [](const std::vector<FeatureScore>& list,
                    const std::vector<std::string>& kept,
                    const std::vector<std::string>& removed) {
      if (kept.size() + removed.size() != list.size()) return false;
      for (std::size_t i = 0; i < kept.size(); ++i) {
        if (kept[i] != list[i].name) return false;
      }
      std::set<std::string> rest(removed.begin(), removed.end());
      if (rest.size() != removed.size()) return false;
      for (std::size_t i = kept.size(); i < list.size(); ++i) {
        if (!rest.count(list[i].name)) return false;
      }
      return true;
    };
    return check(ranked.numerical, kept_numerical, removed_numerical) &&
           check(ranked.categorical, kept_categorical, removed_categorical);
  }

  friend bool operator==(const FeatureSubset&, const FeatureSubset&) = default;
};

}  // namespace neshfs
