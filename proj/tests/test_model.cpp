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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "neshfs/model.hpp"
#include "neshfs/random.hpp"
#include "support/oracles.hpp"

namespace neshfs {
namespace {

EncodedDataset tiny_dataset(std::size_t numerical, std::size_t categorical,
                            std::size_t rows, Rng& rng) {
  EncodedDataset d;
  d.row_count = rows;
  for (std::size_t r = 0; r < rows; ++r) d.label.push_back(rng.bernoulli(0.5));
  for (std::size_t f = 0; f < numerical; ++f) {
    d.numerical_names.push_back("n" + std::to_string(f));
    std::vector<double> col;
    for (std::size_t r = 0; r < rows; ++r) col.push_back(rng.uniform());
    d.numerical.push_back(col);
  }
  for (std::size_t f = 0; f < categorical; ++f) {
    d.categorical_names.push_back("c" + std::to_string(f));
    const auto vocab = static_cast<std::uint32_t>(2 + rng.index(4));
    std::vector<std::uint32_t> col;
    for (std::size_t r = 0; r < rows; ++r) {
      col.push_back(static_cast<std::uint32_t>(rng.index(vocab)));
    }
    d.categorical.push_back(col);
    d.vocab_sizes.push_back(vocab);
  }
  d.split_assignment.assign(rows, Split::kTrain);
  return d;
}

FeatureSubset all_of(const EncodedDataset& d) {
  FeatureSubset s;
  s.kept_numerical = d.numerical_names;
  s.kept_categorical = d.categorical_names;
  return s;
}

/// Largest violation of |analytic - numeric| <= 1e-4 * max(|a|, |n|) + 1e-8.
double gradient_check(ModelKind kind, std::uint64_t seed) {
  Rng rng(seed);
  const auto p = rng.index(3);
  const auto c = 1 + rng.index(5 - p);
  const auto rows = 2 + rng.index(19);
  auto data = tiny_dataset(p, c, rows, rng);
  CtrModel model(kind, data, all_of(data), 1 + rng.index(4), seed);
  for (auto& w : model.parameters()) w = rng.uniform(-0.5, 0.5);

  std::vector<std::size_t> batch;
  for (std::size_t r = 0; r < rows; ++r) batch.push_back(r);
  const double l2 = 1e-3;
  const auto analytic = model.full_gradient(batch, l2);
  const auto numeric = testing::central_differences(
      model.parameters(), [&] { return model.objective(batch, l2); }, 1e-6);
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double bound =
        1e-4 * std::max(std::abs(analytic[i]), std::abs(numeric[i])) + 1e-8;
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / bound);
  }
  return worst;
}

class GradientCheck : public ::testing::TestWithParam<ModelKind> {};

TEST_P(GradientCheck, MatchesCentralDifferences) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    EXPECT_LE(gradient_check(GetParam(), seed), 1.0) << "seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(AllModels, GradientCheck,
                         ::testing::Values(ModelKind::kLogistic, ModelKind::kFm,
                                           ModelKind::kFmMlp),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Fm, SquareOfSumsEqualsExplicitPairs) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto fields = 1 + rng.index(12);
    const auto dim = 1 + rng.index(16);
    std::vector<double> v(fields * dim);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    EXPECT_NEAR(pairwise_interaction(v, dim), pairwise_interaction_naive(v, dim), 1e-9);
  }
}

TEST(Fm, ModelInteractionMatchesExplicitPairs) {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    auto data = tiny_dataset(rng.index(3), 1 + rng.index(4), 6, rng);
    const std::size_t dim = 1 + rng.index(6);
    CtrModel fm(ModelKind::kFm, data, all_of(data), dim, trial);
    for (auto& w : fm.parameters()) w = rng.uniform(-1.0, 1.0);
    auto ws = fm.make_workspace();
    for (std::size_t row = 0; row < data.row_count; ++row) {
      const double z = fm.logit(row, ws);
      EXPECT_NEAR(z - fm.linear_logit(row), pairwise_interaction_naive(ws.embed, dim),
                  1e-9);
    }
  }
}

TEST(Model, EmptySubsetIsRejected) {
  Rng rng(1);
  auto data = tiny_dataset(1, 1, 4, rng);
  EXPECT_THROW(CtrModel(ModelKind::kFm, data, FeatureSubset{}, 4, 0), Error);
}

TEST(Model, UnknownFeatureIsRejected) {
  Rng rng(1);
  auto data = tiny_dataset(1, 1, 4, rng);
  FeatureSubset s;
  s.kept_categorical = {"nope"};
  EXPECT_THROW(CtrModel(ModelKind::kLogistic, data, s, 4, 0), Error);
}

TEST(Model, InitializationIsSeeded) {
  Rng rng(1);
  auto data = tiny_dataset(2, 2, 4, rng);
  CtrModel a(ModelKind::kFmMlp, data, all_of(data), 4, 9);
  CtrModel b(ModelKind::kFmMlp, data, all_of(data), 4, 9);
  EXPECT_TRUE(std::equal(a.parameters().begin(), a.parameters().end(),
                         b.parameters().begin()));
  // Linear weights and bias start at zero; embeddings within 0.01.
  EXPECT_EQ(a.parameters()[0], 0.0);
  for (std::size_t f = 0; f < 2; ++f) EXPECT_EQ(a.parameters()[1 + f], 0.0);
  for (std::size_t i = 3; i < 3 + 2 * 4; ++i) {
    EXPECT_LE(std::abs(a.parameters()[i]), 0.01);
  }
}

}  // namespace
}  // namespace neshfs
