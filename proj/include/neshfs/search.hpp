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
#include <concepts>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "neshfs/error.hpp"
#include "neshfs/ledger.hpp"
#include "neshfs/parallel.hpp"
#include "neshfs/scoring.hpp"
#include "neshfs/subset.hpp"

namespace neshfs {

/// Step sizes of the search.
///   categorical_step (i)  categorical features dropped per outer level
///   numerical_step (j)    numerical features dropped per inner level
///   up (u), down (d)      neighborhood moves around each top subset
///   top_k (k)             number of general-search subsets refined
///   min_total             down moves stop once a subset has this few features
struct SearchParams {
  std::size_t categorical_step = 5;
  std::size_t numerical_step = 3;
  std::size_t up = 3;
  std::size_t down = 3;
  std::size_t top_k = 3;
  std::size_t min_total = 3;

  void validate(const RankedFeatures& ranked) const {
    if (!ranked.categorical.empty() && categorical_step < 1) {
      throw ConfigError("search: categorical step i must be >= 1");
    }
    if (min_total < 1) throw ConfigError("search: min_total must be >= 1");
  }
};

template <class F>
concept SubsetEvaluator =
    std::invocable<F&, const FeatureSubset&> &&
    std::convertible_to<std::invoke_result_t<F&, const FeatureSubset&>,
                        EvalRecord>;

/// Feature counts visited by one loop: full, full-step, ... while at least one
/// feature would remain. An empty list yields the single level 0; a zero step
/// yields only the full level.
inline std::vector<std::size_t> removal_levels(std::size_t full,
                                               std::size_t step) {
  std::vector<std::size_t> levels{full};
  if (full == 0 || step == 0) return levels;
  for (std::size_t n = full; n > step; n -= step) levels.push_back(n - step);
  return levels;
}

/// Subsets of the general search: categorical levels outer, numerical levels
/// inner; the first subset is the full feature set.
inline std::vector<FeatureSubset> general_schedule(const RankedFeatures& ranked,
                                                   const SearchParams& params) {
  if (ranked.total() == 0) throw Error("general_schedule: no features");
  params.validate(ranked);
  std::vector<FeatureSubset> schedule;
  for (auto c : removal_levels(ranked.categorical.size(), params.categorical_step)) {
    for (auto p : removal_levels(ranked.numerical.size(), params.numerical_step)) {
      if (p + c == 0) continue;
      schedule.push_back(FeatureSubset::prefix(ranked, p, c));
    }
  }
  return schedule;
}

/// The up to `params.up` subsets the up-neighborhood visits from start.
inline std::vector<FeatureSubset> up_neighbors(const FeatureSubset& start,
                                               const SearchParams& params) {
  std::vector<FeatureSubset> out;
  FeatureSubset cur = start;
  for (std::size_t it = 0; it < params.up; ++it) {
    auto& p = cur.kept_numerical;
    auto& q = cur.kept_categorical;
    auto& rp = cur.removed_numerical;
    auto& rq = cur.removed_categorical;
    if (rp.empty()) {
      if (rq.empty()) break;
      q.push_back(rq.back());
      rq.pop_back();
      for (std::size_t n = 0; n < params.numerical_step && !p.empty(); ++n) {
        rp.push_back(p.back());
        p.pop_back();
      }
      // Never leave the numerical side empty when something can come back.
      if (p.empty() && !rp.empty()) {
        p.push_back(rp.back());
        rp.pop_back();
      }
    } else {
      p.push_back(rp.back());
      rp.pop_back();
    }
    out.push_back(cur);
  }
  return out;
}

/// The up to `params.down` subsets the down-neighborhood visits from start.
inline std::vector<FeatureSubset> down_neighbors(const FeatureSubset& start,
                                                 const SearchParams& params) {
  std::vector<FeatureSubset> out;
  FeatureSubset cur = start;
  for (std::size_t it = 0; it < params.down; ++it) {
    if (cur.size() <= params.min_total) break;
    auto& p = cur.kept_numerical;
    auto& q = cur.kept_categorical;
    auto& rp = cur.removed_numerical;
    auto& rq = cur.removed_categorical;
    if (!p.empty()) {
      rp.push_back(p.back());
      p.pop_back();
    }
    if (p.empty()) {
      if (q.empty()) break;
      rq.push_back(q.back());
      q.pop_back();
      while (!rp.empty()) {
        p.push_back(rp.back());
        rp.pop_back();
      }
    }
    if (cur.empty()) break;
    out.push_back(cur);
  }
  return out;
}

struct EvaluationStats {
  std::size_t requested = 0;  // subsets the step derived
  std::size_t evaluated = 0;  // new evaluator calls
  std::size_t failed = 0;     // evaluator calls that raised
};

/// Evaluates the subsets whose keys are not yet in the ledger and appends the
/// results in input order with the given tag. Evaluator exceptions become
/// failed records.
template <SubsetEvaluator Evaluator>
EvaluationStats evaluate_subsets(std::span<const FeatureSubset> subsets,
                                 const std::string& tag, Evaluator& evaluator,
                                 Ledger& ledger, std::size_t workers = 1) {
  EvaluationStats stats;
  stats.requested = subsets.size();
  std::vector<FeatureSubset> pending;
  std::unordered_set<std::string> queued;
  for (const auto& s : subsets) {
    auto key = s.key();
    if (ledger.contains(key) || !queued.insert(key).second) continue;
    pending.push_back(s);
  }
  auto results = parallel_map(
      std::span<const FeatureSubset>(pending), workers,
      [&](const FeatureSubset& s) -> EvalRecord {
        try {
          EvalRecord r = evaluator(s);
          // The engine owns identity fields.
          r.subset_key = s.key();
          r.features = s.kept();
          r.n_numerical = s.kept_numerical.size();
          r.n_categorical = s.kept_categorical.size();
          return r;
        } catch (const std::exception& e) {
          return EvalRecord::failure(s, e.what());
        } catch (...) {
          return EvalRecord::failure(s, "unknown error");
        }
      });
  for (auto& r : results) {
    r.tag = tag;
    if (!r.ok()) ++stats.failed;
    ledger.insert(std::move(r));
    ++stats.evaluated;
  }
  return stats;
}

/// Evaluates the general schedule; the first subset is tagged "base", the
/// rest "general".
template <SubsetEvaluator Evaluator>
EvaluationStats run_general_search(const RankedFeatures& ranked,
                                   const SearchParams& params,
                                   Evaluator& evaluator, Ledger& ledger,
                                   std::size_t workers = 1) {
  const auto schedule = general_schedule(ranked, params);
  const std::span<const FeatureSubset> all(schedule);
  auto stats = evaluate_subsets(all.first(1), "base", evaluator, ledger, workers);
  const auto rest =
      evaluate_subsets(all.subspan(1), "general", evaluator, ledger, workers);
  stats.requested += rest.requested;
  stats.evaluated += rest.evaluated;
  stats.failed += rest.failed;
  return stats;
}

template <SubsetEvaluator Evaluator>
EvaluationStats up_search(const FeatureSubset& start, const SearchParams& params,
                          Evaluator& evaluator, Ledger& ledger,
                          const std::string& tag = "u", std::size_t workers = 1) {
  const auto moves = up_neighbors(start, params);
  return evaluate_subsets(std::span<const FeatureSubset>(moves), tag, evaluator,
                          ledger, workers);
}

template <SubsetEvaluator Evaluator>
EvaluationStats down_search(const FeatureSubset& start,
                            const SearchParams& params, Evaluator& evaluator,
                            Ledger& ledger, const std::string& tag = "d",
                            std::size_t workers = 1) {
  const auto moves = down_neighbors(start, params);
  return evaluate_subsets(std::span<const FeatureSubset>(moves), tag, evaluator,
                          ledger, workers);
}

/// Ordering of the top-k selection: higher AUC, then fewer features, then
/// earlier position.
inline bool ranks_before(const EvalRecord& a, std::size_t a_pos,
                         const EvalRecord& b, std::size_t b_pos) {
  if (a.auc != b.auc) return a.auc > b.auc;
  if (a.n_features() != b.n_features()) return a.n_features() < b.n_features();
  return a_pos < b_pos;
}

/// Positions of the successful records, best first.
inline std::vector<std::size_t> order_by_auc(std::span<const EvalRecord> records) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].ok()) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranks_before(records[a], a, records[b], b);
  });
  return order;
}

struct TopK {
  std::vector<FeatureSubset> subsets;
  std::vector<EvalRecord> records;
  bool truncated = false;  // fewer than k successful records were available
};

inline TopK select_top_k(std::span<const EvalRecord> records,
                         const RankedFeatures& ranked, std::size_t k) {
  const auto order = order_by_auc(records);
  if (order.empty()) throw Error("select_top_k: no successful evaluations");
  TopK top;
  top.truncated = k > order.size();
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
    const auto& r = records[order[i]];
    top.subsets.push_back(FeatureSubset::from_names(ranked, r.features));
    top.records.push_back(r);
  }
  return top;
}

inline TopK select_top_k(const Ledger& ledger, const RankedFeatures& ranked,
                         std::size_t k) {
  return select_top_k(std::span<const EvalRecord>(ledger.entries()), ranked, k);
}

struct NeshfsResult {
  FeatureSubset best;
  EvalRecord best_record;
  EvaluationStats stats;
  bool top_k_truncated = false;
};

namespace detail {

inline void add_stats(EvaluationStats& into, const EvaluationStats& s) {
  into.requested += s.requested;
  into.evaluated += s.evaluated;
  into.failed += s.failed;
}

inline std::vector<EvalRecord> records_for(const Ledger& ledger,
                                           std::span<const FeatureSubset> subsets) {
  std::vector<EvalRecord> out;
  std::unordered_set<std::string> seen;
  for (const auto& s : subsets) {
    auto key = s.key();
    if (!seen.insert(key).second) continue;
    if (const auto* r = ledger.find(key)) out.push_back(*r);
  }
  return out;
}

}  // namespace detail

/// Full search: general schedule, top-k selection over its results, then up
/// and down neighborhoods around each selected subset (tagged "<rank>-u" and
/// "<rank>-d"). Returns the best subset the run visited.
///
/// Subsets already present in the ledger are not re-evaluated, so a ledger
/// loaded from an earlier run resumes it.
template <SubsetEvaluator Evaluator>
NeshfsResult run_neshfs(const RankedFeatures& ranked, const SearchParams& params,
                        Evaluator& evaluator, Ledger& ledger,
                        std::size_t workers = 1) {
  NeshfsResult result;
  const auto schedule = general_schedule(ranked, params);
  detail::add_stats(result.stats,
                    run_general_search(ranked, params, evaluator, ledger, workers));

  std::vector<FeatureSubset> visited = schedule;
  if (params.top_k > 0) {
    const auto general = detail::records_for(ledger, schedule);
    const auto top = select_top_k(std::span<const EvalRecord>(general), ranked,
                                  params.top_k);
    result.top_k_truncated = top.truncated;
    for (std::size_t t = 0; t < top.subsets.size(); ++t) {
      const auto& start = top.subsets[t];
      const auto rank = std::to_string(t + 1);
      const auto up = up_neighbors(start, params);
      detail::add_stats(result.stats,
                        evaluate_subsets(std::span<const FeatureSubset>(up),
                                         rank + "-u", evaluator, ledger, workers));
      const auto down = down_neighbors(start, params);
      detail::add_stats(result.stats,
                        evaluate_subsets(std::span<const FeatureSubset>(down),
                                         rank + "-d", evaluator, ledger, workers));
      visited.insert(visited.end(), up.begin(), up.end());
      visited.insert(visited.end(), down.begin(), down.end());
    }
  }

  const auto records = detail::records_for(ledger, visited);
  const auto best = select_top_k(std::span<const EvalRecord>(records), ranked, 1);
  result.best = best.subsets.front();
  result.best_record = best.records.front();
  return result;
}

template <SubsetEvaluator Evaluator>
std::pair<NeshfsResult, Ledger> run_neshfs(const RankedFeatures& ranked,
                                           const SearchParams& params,
                                           Evaluator& evaluator) {
  Ledger ledger;
  auto result = run_neshfs(ranked, params, evaluator, ledger);
  return {std::move(result), std::move(ledger)};
}

struct PlannedSubset {
  std::string tag;
  FeatureSubset subset;
};

/// Every subset a run would evaluate, deduplicated, if the top-k selection
/// picked the first k general subsets. Needs no evaluator.
inline std::vector<PlannedSubset> plan_neshfs(const RankedFeatures& ranked,
                                              const SearchParams& params) {
  std::vector<PlannedSubset> plan;
  std::unordered_set<std::string> seen;
  auto add = [&](const std::string& tag, const std::vector<FeatureSubset>& subsets) {
    for (const auto& s : subsets) {
      if (seen.insert(s.key()).second) plan.push_back({tag, s});
    }
  };
  const auto schedule = general_schedule(ranked, params);
  add("base", {schedule.front()});
  add("general", {schedule.begin() + 1, schedule.end()});
  const std::size_t k = std::min(params.top_k, schedule.size());
  for (std::size_t t = 0; t < k; ++t) {
    const auto rank = std::to_string(t + 1);
    add(rank + "-u", up_neighbors(schedule[t], params));
    add(rank + "-d", down_neighbors(schedule[t], params));
  }
  return plan;
}

}  // namespace neshfs
