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

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <vector>
#include <string>

#include <json.hpp>

#include "neshfs/dataset.hpp"
#include "neshfs/error.hpp"
#include "neshfs/evaluator.hpp"
#include "neshfs/ga.hpp"
#include "neshfs/search.hpp"

namespace neshfs {

/// Everything one CLI invocation needs. Paths are absolute after loading.
struct RunConfig {
  std::string dataset_path;
  std::string schema_path;
  std::optional<std::size_t> sample_n;
  std::uint64_t seed = 0;
  SplitRatios split_ratios{0.8, 0.1, 0.1};
  SearchParams search_params;
  TrainConfig train_config;
  GAConfig ga_config;
  std::size_t worker_count = 1;
  std::string output_dir = "out";
  std::string ledger_path;  // defaults to <output_dir>/ledger.jsonl

  // Whether train/ga seeds were given explicitly; otherwise they follow seed.
  bool train_seed_explicit = false;
  bool ga_seed_explicit = false;
  bool ledger_explicit = false;

  void set_seed(std::uint64_t value) {
    seed = value;
    if (!train_seed_explicit) train_config.seed = value;
    if (!ga_seed_explicit) ga_config.seed = value;
  }

  /// Moves the output directory; a ledger path not set explicitly follows it.
  void set_output_dir(const std::string& dir) {
    output_dir = std::filesystem::absolute(dir).lexically_normal().string();
    if (!ledger_explicit) {
      ledger_path = (std::filesystem::path(output_dir) / "ledger.jsonl").string();
    }
  }

  void validate() const {
    if (worker_count < 1) throw ConfigError("worker_count must be >= 1");
    if (dataset_path.empty()) throw ConfigError("dataset_path is required");
    if (schema_path.empty()) throw ConfigError("schema_path is required");
    train_config.validate();
    split_counts(10, split_ratios);  // throws on bad ratios
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const char* where,
                           std::initializer_list<const char*> allowed) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) {
      throw ConfigError(std::string("unknown key '") + key + "' in " + where);
    }
  }
}

template <class T>
void read_opt(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) out = obj.at(key).get<T>();
}

}  // namespace detail

/// Parses a run configuration; relative paths resolve against base_dir.
inline RunConfig run_config_from_json(const nlohmann::json& doc,
                                      const std::filesystem::path& base_dir) {
  using detail::read_opt;
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  RunConfig cfg;
  try {
    detail::reject_unknown(doc, "config",
                           {"dataset_path", "schema_path", "sample_n", "seed",
                            "split_ratios", "search_params", "train_config",
                            "ga_config", "worker_count", "output_dir",
                            "ledger_path"});
    read_opt(doc, "dataset_path", cfg.dataset_path);
    read_opt(doc, "schema_path", cfg.schema_path);
    if (doc.contains("sample_n") && !doc.at("sample_n").is_null()) {
      cfg.sample_n = doc.at("sample_n").get<std::size_t>();
    }
    if (doc.contains("split_ratios")) {
      const auto ratios = doc.at("split_ratios").get<std::vector<double>>();
      if (ratios.size() != 3) throw ConfigError("split_ratios needs 3 values");
      std::copy(ratios.begin(), ratios.end(), cfg.split_ratios.begin());
    }
    read_opt(doc, "worker_count", cfg.worker_count);
    read_opt(doc, "output_dir", cfg.output_dir);
    read_opt(doc, "ledger_path", cfg.ledger_path);
    cfg.ledger_explicit = !cfg.ledger_path.empty();

    if (doc.contains("search_params")) {
      const auto& s = doc.at("search_params");
      detail::reject_unknown(s, "search_params",
                             {"i", "j", "u", "d", "k", "min_total"});
      auto& p = cfg.search_params;
      read_opt(s, "i", p.categorical_step);
      read_opt(s, "j", p.numerical_step);
      read_opt(s, "u", p.up);
      read_opt(s, "d", p.down);
      read_opt(s, "k", p.top_k);
      read_opt(s, "min_total", p.min_total);
    }
    if (doc.contains("train_config")) {
      const auto& t = doc.at("train_config");
      detail::reject_unknown(t, "train_config",
                             {"batch_size", "patience", "max_epochs",
                              "learning_rate", "embedding_dim", "l2", "seed",
                              "model_kind", "record_wall_time"});
      auto& c = cfg.train_config;
      read_opt(t, "batch_size", c.batch_size);
      read_opt(t, "patience", c.patience);
      read_opt(t, "max_epochs", c.max_epochs);
      read_opt(t, "learning_rate", c.learning_rate);
      read_opt(t, "embedding_dim", c.embedding_dim);
      read_opt(t, "l2", c.l2);
      read_opt(t, "record_wall_time", c.record_wall_time);
      if (t.contains("model_kind")) {
        c.model_kind = parse_model_kind(t.at("model_kind").get<std::string>());
      }
      if (t.contains("seed")) {
        c.seed = t.at("seed").get<std::uint64_t>();
        cfg.train_seed_explicit = true;
      }
    }
    if (doc.contains("ga_config")) {
      const auto& g = doc.at("ga_config");
      detail::reject_unknown(g, "ga_config",
                             {"population_size", "mating_pool", "mutate_genes",
                              "generations", "seed"});
      auto& c = cfg.ga_config;
      read_opt(g, "population_size", c.population_size);
      read_opt(g, "mating_pool", c.mating_pool);
      read_opt(g, "mutate_genes", c.mutate_genes);
      read_opt(g, "generations", c.generations);
      if (g.contains("seed")) {
        c.seed = g.at("seed").get<std::uint64_t>();
        cfg.ga_seed_explicit = true;
      }
    }
    std::uint64_t seed = 0;
    read_opt(doc, "seed", seed);
    cfg.set_seed(seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  auto resolve = [&](std::string& path) {
    if (!path.empty() && std::filesystem::path(path).is_relative()) {
      path = (base_dir / path).lexically_normal().string();
    }
  };
  resolve(cfg.dataset_path);
  resolve(cfg.schema_path);
  resolve(cfg.output_dir);
  if (cfg.ledger_path.empty()) {
    cfg.ledger_path =
        (std::filesystem::path(cfg.output_dir) / "ledger.jsonl").string();
  } else {
    resolve(cfg.ledger_path);
  }
  cfg.validate();
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  const auto base = std::filesystem::absolute(path).parent_path();
  return run_config_from_json(doc, base);
}

}  // namespace neshfs
