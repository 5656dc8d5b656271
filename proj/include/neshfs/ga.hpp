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
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "neshfs/error.hpp"
#include "neshfs/ledger.hpp"
#include "neshfs/random.hpp"
#include "neshfs/scoring.hpp"
#include "neshfs/search.hpp"
#include "neshfs/subset.hpp"

namespace neshfs {

struct GAConfig {
  std::size_t population_size = 8;
  std::size_t mating_pool = 4;
  std::size_t mutate_genes = 3;
  std::size_t generations = 100;
  std::uint64_t seed = 0;

  void validate(std::size_t chromosome_length) const {
    if (population_size < 1) throw ConfigError("ga: population_size must be >= 1");
    if (mating_pool < 1 || mating_pool > population_size) {
      throw ConfigError("ga: mating_pool must be in [1, population_size]");
    }
    if (mutate_genes > chromosome_length) {
      throw ConfigError("ga: mutate_genes exceeds chromosome length");
    }
    if (generations < 1) throw ConfigError("ga: generations must be >= 1");
  }
};

/// Bit mask over all features (numerical then categorical, ranked order).
struct Chromosome {
  std::vector<bool> mask;
  std::optional<double> fitness;
};

namespace ga {

inline bool any_set(const std::vector<bool>& mask) {
  return std::find(mask.begin(), mask.end(), true) != mask.end();
}

/// Sets one random bit when the mask is empty.
inline void repair(std::vector<bool>& mask, Rng& rng) {
  if (!any_set(mask)) mask[rng.index(mask.size())] = true;
}

inline std::vector<bool> random_mask(std::size_t length, Rng& rng) {
  std::vector<bool> mask(length);
  for (std::size_t i = 0; i < length; ++i) mask[i] = rng.bernoulli(0.5);
  repair(mask, rng);
  return mask;
}

/// Genes [0, point) from a, [point, n) from b.
inline std::vector<bool> single_point_crossover(const std::vector<bool>& a,
                                                const std::vector<bool>& b,
                                                std::size_t point) {
  std::vector<bool> child(b);
  std::copy(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(point), child.begin());
  return child;
}

/// Flips exactly `genes` distinct positions.
inline void mutate(std::vector<bool>& mask, std::size_t genes, Rng& rng) {
  std::vector<std::size_t> positions(mask.size());
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  for (std::size_t i = 0; i < genes; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.index(positions.size() - i));
    std::swap(positions[i], positions[j]);
    mask[positions[i]] = !mask[positions[i]];
  }
}

}  // namespace ga

struct GAResult {
  EvalRecord best;
  std::vector<bool> best_mask;
  std::vector<double> history;  // best fitness per generation
  EvaluationStats stats;
};

/// Genetic-algorithm feature selection: truncation selection of the
/// mating_pool fittest, single-point crossover, mutate_genes flips per
/// offspring and one elite carried over unchanged. Fitness is test AUC;
/// failed evaluations count as 0. Evaluations go through the ledger with tag
/// "ga".
template <SubsetEvaluator Evaluator>
GAResult ga_select(const RankedFeatures& ranked, const GAConfig& config,
                   Evaluator& evaluator, Ledger& ledger,
                   std::size_t workers = 1) {
  const std::size_t length = ranked.total();
  if (length < 2) throw Error("ga_select: need at least two features");
  config.validate(length);
  Rng rng(config.seed);

  std::vector<Chromosome> population;
  for (std::size_t c = 0; c < config.population_size; ++c) {
    population.push_back({ga::random_mask(length, rng), std::nullopt});
  }

  GAResult result;
  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    std::vector<FeatureSubset> pending;
    for (const auto& c : population) {
      if (!c.fitness) pending.push_back(FeatureSubset::from_mask(ranked, c.mask));
    }
    detail::add_stats(result.stats,
                      evaluate_subsets(std::span<const FeatureSubset>(pending),
                                       "ga", evaluator, ledger, workers));
    for (auto& c : population) {
      if (c.fitness) continue;
      const auto* r = ledger.find(FeatureSubset::from_mask(ranked, c.mask).key());
      c.fitness = (r && r->ok()) ? r->auc : 0.0;
    }

    std::stable_sort(population.begin(), population.end(),
                     [](const Chromosome& a, const Chromosome& b) {
                       return *a.fitness > *b.fitness;
                     });
    result.history.push_back(*population.front().fitness);
    if (gen == config.generations) break;

    const std::size_t pool = config.mating_pool;
    std::vector<Chromosome> next{population.front()};
    while (next.size() < config.population_size) {
      const auto a = rng.index(pool);
      auto b = rng.index(pool);
      if (pool > 1) {
        while (b == a) b = rng.index(pool);
      }
      const auto point = 1 + static_cast<std::size_t>(rng.index(length - 1));
      auto child = ga::single_point_crossover(population[a].mask,
                                              population[b].mask, point);
      ga::mutate(child, config.mutate_genes, rng);
      ga::repair(child, rng);
      next.push_back({std::move(child), std::nullopt});
    }
    population = std::move(next);
  }

  result.best_mask = population.front().mask;
  const auto subset = FeatureSubset::from_mask(ranked, result.best_mask);
  result.best = *ledger.find(subset.key());
  return result;
}

}  // namespace neshfs
