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

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "neshfs/random.hpp"
#include "neshfs/search.hpp"
#include "support/reference_runs.hpp"

namespace neshfs {
namespace {

using testing::ReferenceRun;
using testing::ReplayEvaluator;
using testing::shape_of;
using testing::synthetic_ranking;

using Counts = std::vector<std::pair<std::size_t, std::size_t>>;

Counts counts_of(const std::vector<FeatureSubset>& subsets) {
  Counts out;
  for (const auto& s : subsets) {
    out.emplace_back(s.kept_numerical.size(), s.kept_categorical.size());
  }
  return out;
}

RankedFeatures ranking_for(const ReferenceRun& run) {
  return synthetic_ranking(run.numerical, run.categorical);
}

/// Returns the same record for every subset; counts calls.
struct ConstantEvaluator {
  double auc = 0.7;
  std::size_t calls = 0;
  EvalRecord operator()(const FeatureSubset& s) {
    ++calls;
    auto r = EvalRecord::for_subset(s);
    r.auc = auc;
    r.logloss = 0.5;
    return r;
  }
};

/// Deterministic AUC from the subset key.
struct HashEvaluator {
  EvalRecord operator()(const FeatureSubset& s) const {
    auto r = EvalRecord::for_subset(s);
    Rng rng(std::hash<std::string>{}(s.key()));
    r.auc = 0.5 + 0.4 * rng.uniform();
    r.logloss = 0.5;
    return r;
  }
};

TEST(RemovalLevels, Steps) {
  EXPECT_EQ(removal_levels(22, 5), (std::vector<std::size_t>{22, 17, 12, 7, 2}));
  EXPECT_EQ(removal_levels(13, 3), (std::vector<std::size_t>{13, 10, 7, 4, 1}));
  EXPECT_EQ(removal_levels(3, 3), (std::vector<std::size_t>{3}));
  EXPECT_EQ(removal_levels(4, 0), (std::vector<std::size_t>{4}));
  EXPECT_EQ(removal_levels(0, 3), (std::vector<std::size_t>{0}));
}

TEST(GeneralSchedule, Digix) {
  const auto run = testing::digix_reference();
  EXPECT_EQ(counts_of(general_schedule(ranking_for(run), run.params)),
            (Counts{{3, 22}, {3, 17}, {3, 12}, {3, 7}, {3, 2}}));
}

TEST(GeneralSchedule, CriteoCategoricalOuterNumericalInner) {
  const auto run = testing::criteo_reference();
  Counts expected;
  for (std::size_t c : {26, 21, 16, 11, 6, 1}) {
    for (std::size_t p : {13, 10, 7, 4, 1}) expected.emplace_back(p, c);
  }
  EXPECT_EQ(counts_of(general_schedule(ranking_for(run), run.params)), expected);
}

TEST(GeneralSchedule, AvazuWithoutNumerical) {
  const auto run = testing::avazu_reference();
  EXPECT_EQ(counts_of(general_schedule(ranking_for(run), run.params)),
            (Counts{{0, 24}, {0, 19}, {0, 14}, {0, 9}, {0, 4}}));
}

TEST(GeneralSchedule, NoCategoricalAndNoFeatures) {
  SearchParams p;
  p.numerical_step = 2;
  EXPECT_EQ(counts_of(general_schedule(synthetic_ranking(5, 0), p)),
            (Counts{{5, 0}, {3, 0}, {1, 0}}));
  EXPECT_THROW(general_schedule(synthetic_ranking(0, 0), p), Error);
}

TEST(GeneralSchedule, ZeroCategoricalStepIsRejected) {
  SearchParams p;
  p.categorical_step = 0;
  EXPECT_THROW(general_schedule(synthetic_ranking(2, 4), p), ConfigError);
}

TEST(GeneralSearch, RecordsEveryScheduledSubsetOnce) {
  for (const auto& run : {testing::digix_reference(), testing::criteo_reference()}) {
    ConstantEvaluator eval;
    Ledger ledger;
    const auto stats = run_general_search(ranking_for(run), run.params, eval, ledger);
    EXPECT_EQ(ledger.size(), run.general.size()) << run.name;
    EXPECT_EQ(stats.evaluated, run.general.size());
    EXPECT_EQ(shape_of(ledger), shape_of(run.general)) << run.name;
  }
}

TEST(GeneralSearch, RerunOnFullLedgerEvaluatesNothing) {
  const auto run = testing::digix_reference();
  ConstantEvaluator eval;
  Ledger ledger;
  run_general_search(ranking_for(run), run.params, eval, ledger);
  const auto stats = run_general_search(ranking_for(run), run.params, eval, ledger);
  EXPECT_EQ(stats.evaluated, 0u);
  EXPECT_EQ(stats.requested, 5u);
  EXPECT_EQ(eval.calls, 5u);
  EXPECT_EQ(ledger.size(), 5u);
}

EvalRecord record(const RankedFeatures& ranked, std::size_t p, std::size_t q,
                  double auc) {
  auto r = EvalRecord::for_subset(FeatureSubset::prefix(ranked, p, q));
  r.auc = auc;
  return r;
}

TEST(SelectTopK, DigixGeneralResults) {
  const auto run = testing::digix_reference();
  const auto ranked = ranking_for(run);
  std::vector<EvalRecord> records;
  for (const auto& row : run.general) {
    records.push_back(record(ranked, row.n_numerical, row.n_categorical, row.auc));
  }
  const auto top = select_top_k(std::span<const EvalRecord>(records), ranked, 3);
  EXPECT_EQ(counts_of(top.subsets), (Counts{{3, 2}, {3, 17}, {3, 7}}));
  EXPECT_FALSE(top.truncated);
}

TEST(SelectTopK, SingleEntryWithLargerK) {
  const auto ranked = synthetic_ranking(2, 2);
  const std::vector<EvalRecord> records{record(ranked, 1, 1, 0.6)};
  const auto top = select_top_k(std::span<const EvalRecord>(records), ranked, 3);
  ASSERT_EQ(top.subsets.size(), 1u);
  EXPECT_EQ(top.subsets[0], FeatureSubset::prefix(ranked, 1, 1));
  EXPECT_TRUE(top.truncated);
}

TEST(SelectTopK, TiePrefersSmallerThenEarlier) {
  const auto ranked = synthetic_ranking(3, 3);
  const std::vector<EvalRecord> records{record(ranked, 3, 3, 0.7),
                                        record(ranked, 1, 1, 0.7),
                                        record(ranked, 2, 1, 0.7),
                                        record(ranked, 1, 2, 0.7)};
  const auto top = select_top_k(std::span<const EvalRecord>(records), ranked, 4);
  EXPECT_EQ(counts_of(top.subsets), (Counts{{1, 1}, {2, 1}, {1, 2}, {3, 3}}));
}

TEST(SelectTopK, FailedRecordsAreIgnored) {
  const auto ranked = synthetic_ranking(2, 2);
  std::vector<EvalRecord> records{
      EvalRecord::failure(FeatureSubset::prefix(ranked, 2, 2), "boom"),
      record(ranked, 1, 1, 0.55)};
  const auto top = select_top_k(std::span<const EvalRecord>(records), ranked, 2);
  EXPECT_EQ(counts_of(top.subsets), (Counts{{1, 1}}));
  records.pop_back();
  EXPECT_THROW(select_top_k(std::span<const EvalRecord>(records), ranked, 2), Error);
}

FeatureSubset start_at(const ReferenceRun& run, std::size_t p, std::size_t q) {
  return FeatureSubset::prefix(ranking_for(run), p, q);
}

TEST(UpNeighbors, DigixFromSmallestGeneral) {
  const auto run = testing::digix_reference();
  EXPECT_EQ(counts_of(up_neighbors(start_at(run, 3, 2), run.params)),
            (Counts{{1, 3}, {2, 3}, {3, 3}}));
}

TEST(UpNeighbors, CriteoRestoresNumericalFirst) {
  const auto run = testing::criteo_reference();
  EXPECT_EQ(counts_of(up_neighbors(start_at(run, 10, 26), run.params)),
            (Counts{{11, 26}, {12, 26}, {13, 26}}));
}

TEST(UpNeighbors, FullSetHasNoMoves) {
  const auto run = testing::criteo_reference();
  EXPECT_TRUE(up_neighbors(start_at(run, 13, 26), run.params).empty());
}

TEST(UpNeighbors, RestoresHighestScoredFirst) {
  const auto ranked = synthetic_ranking(4, 0);
  const auto moves = up_neighbors(FeatureSubset::prefix(ranked, 1, 0), SearchParams{});
  ASSERT_EQ(moves.size(), 3u);
  EXPECT_EQ(moves[0].kept_numerical, (std::vector<std::string>{"N01", "N02"}));
  EXPECT_EQ(moves[2], FeatureSubset::full(ranked));
}

TEST(DownNeighbors, DigixHaltsAtMinimumTotal) {
  const auto run = testing::digix_reference();
  EXPECT_EQ(counts_of(down_neighbors(start_at(run, 3, 2), run.params)),
            (Counts{{2, 2}, {1, 2}}));
}

TEST(DownNeighbors, DigixDropsCategoricalWhenNumericalRunsOut) {
  const auto run = testing::digix_reference();
  EXPECT_EQ(counts_of(down_neighbors(start_at(run, 3, 17), run.params)),
            (Counts{{2, 17}, {1, 17}, {3, 16}}));
}

TEST(DownNeighbors, AvazuRemovesOneCategoricalPerMove) {
  const auto run = testing::avazu_reference();
  EXPECT_EQ(counts_of(down_neighbors(start_at(run, 0, 14), run.params)),
            (Counts{{0, 13}, {0, 12}, {0, 11}}));
}

TEST(DownNeighbors, NeverEmitsEmptySubset) {
  SearchParams p;
  p.min_total = 1;
  p.down = 10;
  const auto ranked = synthetic_ranking(2, 1);
  const auto moves = down_neighbors(FeatureSubset::prefix(ranked, 2, 1), p);
  for (const auto& m : moves) EXPECT_FALSE(m.empty());
  EXPECT_EQ(counts_of(moves), (Counts{{1, 1}, {2, 0}, {1, 0}}));
}

void expect_reference_run(const ReferenceRun& run) {
  ReplayEvaluator eval(run);
  auto [result, ledger] = run_neshfs(ranking_for(run), run.params, eval);
  auto expected = run.general;
  expected.insert(expected.end(), run.neighborhood.begin(), run.neighborhood.end());
  EXPECT_EQ(shape_of(ledger), shape_of(expected)) << run.name;
  EXPECT_EQ(result.stats.failed, 0u);
  EXPECT_EQ(eval.calls(), expected.size());
}

TEST(RunNeshfs, ReproducesDigixTables) { expect_reference_run(testing::digix_reference()); }
TEST(RunNeshfs, ReproducesCriteoTables) { expect_reference_run(testing::criteo_reference()); }
TEST(RunNeshfs, ReproducesAvazuTables) { expect_reference_run(testing::avazu_reference()); }

TEST(RunNeshfs, BestSubsets) {
  struct Case {
    ReferenceRun run;
    std::size_t p, q;
    double auc;
  };
  for (const auto& c : {Case{testing::digix_reference(), 3, 2, 0.78838},
                        Case{testing::avazu_reference(), 0, 19, 0.75996},
                        Case{testing::criteo_reference(), 12, 26, 0.74432}}) {
    ReplayEvaluator eval(c.run);
    const auto [result, ledger] = run_neshfs(ranking_for(c.run), c.run.params, eval);
    EXPECT_EQ(result.best, start_at(c.run, c.p, c.q)) << c.run.name;
    EXPECT_EQ(result.best_record.auc, c.auc);
  }
}

TEST(RunNeshfs, DegenerateParamsReturnBestGeneral) {
  auto run = testing::digix_reference();
  run.params.top_k = run.params.up = run.params.down = 0;
  ReplayEvaluator eval(run);
  const auto [result, ledger] = run_neshfs(ranking_for(run), run.params, eval);
  EXPECT_EQ(ledger.size(), 5u);
  EXPECT_EQ(result.best, start_at(run, 3, 2));
}

TEST(RunNeshfs, ResumeFromCompleteLedgerTrainsNothing) {
  const auto run = testing::criteo_reference();
  ReplayEvaluator first(run);
  auto [result, ledger] = run_neshfs(ranking_for(run), run.params, first);
  ReplayEvaluator second(run);
  const auto again = run_neshfs(ranking_for(run), run.params, second, ledger);
  EXPECT_EQ(second.calls(), 0u);
  EXPECT_EQ(again.stats.evaluated, 0u);
  EXPECT_EQ(again.best, result.best);
}

TEST(RunNeshfs, ResumeFromPartialLedgerFinishesTheRun) {
  const auto run = testing::digix_reference();
  ReplayEvaluator full(run);
  const auto [reference, complete] = run_neshfs(ranking_for(run), run.params, full);

  Ledger partial;
  for (std::size_t i = 0; i < 8; ++i) partial.insert(complete.entries()[i]);
  ReplayEvaluator resumed(run);
  const auto result = run_neshfs(ranking_for(run), run.params, resumed, partial);
  EXPECT_EQ(resumed.calls(), complete.size() - 8);
  EXPECT_EQ(shape_of(partial), shape_of(complete));
  EXPECT_EQ(result.best, reference.best);
}

TEST(RunNeshfs, FailedEvaluationsAreRecordedAndSkipped) {
  const auto ranked = synthetic_ranking(3, 6);
  SearchParams p;
  p.categorical_step = 2;
  p.numerical_step = 1;
  auto eval = [](const FeatureSubset& s) {
    if (s.kept_numerical.size() == 2) throw std::runtime_error("diverged");
    auto r = EvalRecord::for_subset(s);
    r.auc = 0.6 + 0.01 * static_cast<double>(s.size());
    return r;
  };
  auto [result, ledger] = run_neshfs(ranked, p, eval);
  EXPECT_GT(result.stats.failed, 0u);
  std::size_t failed = 0;
  for (const auto& r : ledger.entries()) {
    if (!r.ok()) {
      ++failed;
      EXPECT_EQ(r.n_numerical, 2u);
      EXPECT_FALSE(r.error.empty());
    }
  }
  EXPECT_EQ(failed, result.stats.failed);
  EXPECT_TRUE(result.best_record.ok());
  EXPECT_EQ(result.best, FeatureSubset::prefix(ranked, 3, 6));
}

TEST(RunNeshfs, WorkerCountDoesNotChangeTheLedger) {
  const auto ranked = synthetic_ranking(7, 12);
  SearchParams p;
  p.categorical_step = 3;
  p.numerical_step = 2;
  HashEvaluator eval;
  Ledger serial, parallel;
  const auto a = run_neshfs(ranked, p, eval, serial, 1);
  const auto b = run_neshfs(ranked, p, eval, parallel, 4);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(to_json(serial.entries()[i]), to_json(parallel.entries()[i]));
  }
  EXPECT_EQ(a.best, b.best);
}

/// Every (numerical prefix, categorical prefix) pair with at least one feature.
std::set<std::string> all_prefix_pairs(const RankedFeatures& ranked) {
  std::set<std::string> keys;
  for (std::size_t p = 0; p <= ranked.numerical.size(); ++p) {
    for (std::size_t q = 0; q <= ranked.categorical.size(); ++q) {
      if (p + q > 0) keys.insert(FeatureSubset::prefix(ranked, p, q).key());
    }
  }
  return keys;
}

TEST(SearchProperties, EveryVisitedSubsetIsAPrefixPair) {
  Rng rng(2024);
  for (int trial = 0; trial < 400; ++trial) {
    const auto np = rng.index(5);
    const auto nc = rng.index(7);
    if (np + nc == 0) continue;
    const auto ranked = synthetic_ranking(np, nc);
    SearchParams p;
    p.categorical_step = 1 + rng.index(4);
    p.numerical_step = rng.index(4);
    p.up = rng.index(5);
    p.down = rng.index(5);
    p.top_k = rng.index(5);
    p.min_total = 1 + rng.index(3);
    HashEvaluator eval;
    Ledger ledger;
    run_neshfs(ranked, p, eval, ledger);

    const auto legal = all_prefix_pairs(ranked);
    std::set<std::string> seen;
    for (const auto& r : ledger.entries()) {
      EXPECT_TRUE(legal.count(r.subset_key)) << r.subset_key;
      EXPECT_TRUE(seen.insert(r.subset_key).second) << "duplicate " << r.subset_key;
      const auto s = FeatureSubset::from_names(ranked, r.features);
      EXPECT_TRUE(s.is_prefix_of(ranked));
      EXPECT_GT(s.size(), 0u);
    }
  }
}

TEST(SearchProperties, NeighborsPartitionTheRankedLists) {
  const auto ranked = synthetic_ranking(4, 6);
  SearchParams p;
  p.numerical_step = 2;
  p.categorical_step = 2;
  p.min_total = 1;
  const auto full = FeatureSubset::full(ranked);
  for (const auto& start : general_schedule(ranked, p)) {
    auto moves = up_neighbors(start, p);
    const auto down = down_neighbors(start, p);
    moves.insert(moves.end(), down.begin(), down.end());
    for (const auto& m : moves) {
      auto num = m.kept_numerical;
      num.insert(num.end(), m.removed_numerical.rbegin(), m.removed_numerical.rend());
      EXPECT_EQ(num, full.kept_numerical);
      auto cat = m.kept_categorical;
      cat.insert(cat.end(), m.removed_categorical.rbegin(), m.removed_categorical.rend());
      EXPECT_EQ(cat, full.kept_categorical);
    }
  }
}

TEST(SearchProperties, SchedulesAreDeterministic) {
  const auto run = testing::criteo_reference();
  const auto plan_a = plan_neshfs(ranking_for(run), run.params);
  const auto plan_b = plan_neshfs(ranking_for(run), run.params);
  ASSERT_EQ(plan_a.size(), plan_b.size());
  for (std::size_t i = 0; i < plan_a.size(); ++i) {
    EXPECT_EQ(plan_a[i].subset.key(), plan_b[i].subset.key());
    EXPECT_EQ(plan_a[i].tag, plan_b[i].tag);
  }
}

TEST(PlanNeshfs, DegenerateParamsListGeneralOnly) {
  auto run = testing::digix_reference();
  run.params.top_k = run.params.up = run.params.down = 0;
  const auto plan = plan_neshfs(ranking_for(run), run.params);
  ASSERT_EQ(plan.size(), 5u);
  EXPECT_EQ(plan[0].tag, "base");
  for (std::size_t i = 1; i < plan.size(); ++i) EXPECT_EQ(plan[i].tag, "general");
}

TEST(PlanNeshfs, UsesFirstScheduleEntriesAsStarts) {
  const auto run = testing::digix_reference();
  const auto plan = plan_neshfs(ranking_for(run), run.params);
  // Start 1 is the full set, so "1-u" is empty; "1-d" starts from (3,22).
  std::vector<std::string> tags;
  for (const auto& e : plan) tags.push_back(e.tag);
  EXPECT_EQ(std::count(tags.begin(), tags.end(), "1-u"), 0);
  EXPECT_EQ(std::count(tags.begin(), tags.end(), "1-d"), 3);
  EXPECT_EQ(plan.front().subset.size(), 25u);
}

}  // namespace
}  // namespace neshfs
