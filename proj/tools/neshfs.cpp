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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "neshfs/commands.hpp"
#include "neshfs/config.hpp"
#include "neshfs/error.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> output;
  bool resume = false;
};

void add_common(CLI::App* cmd, Flags& flags, bool resumable) {
  cmd->add_option("--config", flags.config, "Run configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "Override the run seed");
  cmd->add_option("--workers", flags.workers, "Concurrent evaluations")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--output", flags.output, "Override the output directory");
  if (resumable) {
    cmd->add_flag("--resume", flags.resume, "Continue from the existing ledger");
  }
}

neshfs::RunConfig load(const Flags& flags) {
  auto cfg = neshfs::load_run_config(flags.config);
  if (flags.seed) cfg.set_seed(*flags.seed);
  if (flags.workers) cfg.worker_count = *flags.workers;
  if (flags.output) cfg.set_output_dir(*flags.output);
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neighborhood-search feature selection for CTR prediction"};
  app.require_subcommand(1);
  Flags flags;

  auto* score = app.add_subcommand("score", "Rank features and write ranking.csv");
  auto* schedule =
      app.add_subcommand("schedule", "Write the subset keys a search would evaluate");
  auto* search = app.add_subcommand("search", "Run the neighborhood search");
  auto* ga = app.add_subcommand("ga", "Run the genetic-algorithm baseline");
  auto* report = app.add_subcommand("report", "Render the ledger as report.csv");
  add_common(score, flags, false);
  add_common(schedule, flags, false);
  add_common(search, flags, true);
  add_common(ga, flags, true);
  add_common(report, flags, false);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = load(flags);
    if (score->parsed()) {
      neshfs::commands::score(cfg, std::cout);
    } else if (schedule->parsed()) {
      neshfs::commands::schedule(cfg, std::cout);
    } else if (search->parsed()) {
      neshfs::commands::search(cfg, flags.resume, std::cout);
    } else if (ga->parsed()) {
      neshfs::commands::run_ga(cfg, flags.resume, std::cout);
    } else if (report->parsed()) {
      neshfs::commands::report(cfg, std::cout);
    }
  } catch (const neshfs::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
