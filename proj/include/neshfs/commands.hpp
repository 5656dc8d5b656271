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
#include <iostream>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "neshfs/config.hpp"
#include "neshfs/dataset.hpp"
#include "neshfs/evaluator.hpp"
#include "neshfs/ga.hpp"
#include "neshfs/ledger.hpp"
#include "neshfs/report.hpp"
#include "neshfs/scoring.hpp"
#include "neshfs/search.hpp"

// Subcommand bodies shared by the command-line tool and the integration
// tests. Each writes its artifacts under RunConfig::output_dir.
namespace neshfs::commands {

struct Prepared {
  FeatureSchema schema;
  EncodedDataset data;
  RankedFeatures ranked;
};

inline Prepared prepare(const RunConfig& cfg) {
  Prepared p;
  p.schema = load_schema(cfg.schema_path);
  p.data = split(ingest(cfg.dataset_path, p.schema, cfg.sample_n, cfg.seed),
                 cfg.split_ratios, cfg.seed);
  p.ranked = rank_features(p.data, p.schema);
  return p;
}

inline std::filesystem::path output_file(const RunConfig& cfg,
                                         const std::string& name) {
  std::filesystem::create_directories(cfg.output_dir);
  return std::filesystem::path(cfg.output_dir) / name;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

inline void write_ranking(const RunConfig& cfg, const RankedFeatures& ranked) {
  auto out = open_output(output_file(cfg, "ranking.csv"));
  write_ranking_csv(out, ranked);
}

/// Loads the ledger when resuming, otherwise starts it afresh, and mirrors
/// new records to the ledger file.
inline Ledger open_ledger(const RunConfig& cfg, bool resume) {
  std::filesystem::create_directories(
      std::filesystem::path(cfg.ledger_path).parent_path());
  Ledger ledger = resume ? Ledger::load(cfg.ledger_path) : Ledger{};
  ledger.attach(cfg.ledger_path, !resume);
  return ledger;
}

/// Wraps an evaluator with a progress line per finished training.
template <class Evaluator>
auto with_progress(Evaluator& inner, std::ostream& log) {
  return [&inner, &log, mutex = std::make_shared<std::mutex>()](
             const FeatureSubset& subset) {
    EvalRecord r = inner(subset);
    std::lock_guard lock(*mutex);
    log << "  evaluated " << subset.kept_numerical.size() << "+"
        << subset.kept_categorical.size() << " features: auc="
        << detail::fixed(r.auc, 5) << " epochs=" << r.epochs_run << '\n';
    return r;
  };
}

inline nlohmann::json record_summary(const EvalRecord& r) {
  nlohmann::json j;
  j["key"] = r.subset_key;
  j["features"] = r.features;
  j["n_numerical"] = r.n_numerical;
  j["n_categorical"] = r.n_categorical;
  j["auc"] = r.auc;
  j["logloss"] = r.logloss;
  j["tag"] = r.tag;
  return j;
}

inline void write_json(const std::filesystem::path& path,
                       const nlohmann::json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

struct ScoreResult {
  RankedFeatures ranked;
};

inline ScoreResult score(const RunConfig& cfg, std::ostream& log) {
  auto p = prepare(cfg);
  write_ranking(cfg, p.ranked);
  log << "ranked " << p.ranked.numerical.size() << " numerical and "
      << p.ranked.categorical.size() << " categorical features -> "
      << output_file(cfg, "ranking.csv").string() << '\n';
  return {std::move(p.ranked)};
}

struct ScheduleResult {
  std::vector<PlannedSubset> plan;
  std::size_t general_rows = 0;
};

inline ScheduleResult schedule(const RunConfig& cfg, std::ostream& log) {
  auto p = prepare(cfg);
  ScheduleResult result;
  result.plan = plan_neshfs(p.ranked, cfg.search_params);
  for (const auto& s : result.plan) {
    if (s.tag == "base" || s.tag == "general") ++result.general_rows;
  }
  auto out = open_output(output_file(cfg, "schedule.txt"));
  write_schedule(out, result.plan);
  log << "schedule: " << result.general_rows << " general, "
      << result.plan.size() - result.general_rows << " neighborhood subsets -> "
      << output_file(cfg, "schedule.txt").string() << '\n';
  return result;
}

struct SearchResult {
  NeshfsResult neshfs;
  std::size_t ledger_entries = 0;
};

inline SearchResult search(const RunConfig& cfg, bool resume, std::ostream& log) {
  auto p = prepare(cfg);
  write_ranking(cfg, p.ranked);
  auto ledger = open_ledger(cfg, resume);
  if (resume) log << "resuming with " << ledger.size() << " ledger entries\n";

  CtrEvaluator evaluator(p.data, cfg.train_config);
  auto progress = with_progress(evaluator, log);
  SearchResult result;
  result.neshfs =
      run_neshfs(p.ranked, cfg.search_params, progress, ledger, cfg.worker_count);
  result.ledger_entries = ledger.size();

  {
    auto out = open_output(output_file(cfg, "report.csv"));
    write_report_csv(out, ledger);
  }
  nlohmann::json summary;
  summary["best"] = record_summary(result.neshfs.best_record);
  summary["new_evaluations"] = result.neshfs.stats.evaluated;
  summary["failed_evaluations"] = result.neshfs.stats.failed;
  summary["ledger_entries"] = ledger.size();
  summary["top_k_truncated"] = result.neshfs.top_k_truncated;
  write_json(output_file(cfg, "summary.json"), summary);

  const auto& best = result.neshfs.best_record;
  log << "new evaluations: " << result.neshfs.stats.evaluated << " (failed "
      << result.neshfs.stats.failed << ")\n"
      << "best subset: " << best.n_features() << " (" << best.n_numerical << ", "
      << best.n_categorical << ") auc=" << detail::fixed(best.auc, 5)
      << " logloss=" << detail::fixed(best.logloss, 5) << " [" << best.tag << "]\n"
      << "  " << best.subset_key << '\n';
  return result;
}

struct GaRunResult {
  GAResult ga;
};

inline GaRunResult run_ga(const RunConfig& cfg, bool resume, std::ostream& log) {
  auto p = prepare(cfg);
  auto ledger = open_ledger(cfg, resume);
  CtrEvaluator evaluator(p.data, cfg.train_config);
  auto progress = with_progress(evaluator, log);
  GaRunResult result;
  result.ga = ga_select(p.ranked, cfg.ga_config, progress, ledger, cfg.worker_count);

  {
    auto out = open_output(output_file(cfg, "ga_history.csv"));
    write_history_csv(out, result.ga.history);
  }
  {
    auto out = open_output(output_file(cfg, "ga_report.csv"));
    const EvalRecord rows[] = {result.ga.best};
    write_report_csv(out, std::span<const EvalRecord>(rows));
  }
  nlohmann::json summary;
  summary["best"] = record_summary(result.ga.best);
  summary["new_evaluations"] = result.ga.stats.evaluated;
  summary["failed_evaluations"] = result.ga.stats.failed;
  summary["generations"] = result.ga.history.size();
  write_json(output_file(cfg, "ga_summary.json"), summary);

  const auto& best = result.ga.best;
  log << "new evaluations: " << result.ga.stats.evaluated << '\n'
      << "ga best: " << best.n_features() << " (" << best.n_numerical << ", "
      << best.n_categorical << ") auc=" << detail::fixed(best.auc, 5) << '\n';
  return result;
}

/// Re-renders the ledger into report.csv.
inline std::size_t report(const RunConfig& cfg, std::ostream& log) {
  if (!std::filesystem::exists(cfg.ledger_path)) {
    throw Error("no ledger at " + cfg.ledger_path);
  }
  const auto ledger = Ledger::load(cfg.ledger_path);
  auto out = open_output(output_file(cfg, "report.csv"));
  write_report_csv(out, ledger);
  log << "wrote " << ledger.size() << " rows -> "
      << output_file(cfg, "report.csv").string() << '\n';
  return ledger.size();
}

}  // namespace neshfs::commands
