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

#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "neshfs/ledger.hpp"
#include "neshfs/search.hpp"

namespace neshfs {

namespace detail {

inline std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

}  // namespace detail

/// One row per record in ledger order:
/// n_features,n_numerical,n_categorical,auc,logloss,time_s,tag,rank
/// rank is the AUC position among successful rows (1 = best); failed rows
/// have empty metrics and rank "failed".
inline void write_report_csv(std::ostream& out,
                             std::span<const EvalRecord> records) {
  std::vector<std::size_t> rank(records.size(), 0);
  const auto order = order_by_auc(records);
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i + 1;

  out << "n_features,n_numerical,n_categorical,auc,logloss,time_s,tag,rank\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out << r.n_features() << ',' << r.n_numerical << ',' << r.n_categorical << ',';
    if (r.ok()) {
      out << detail::fixed(r.auc, 6) << ',' << detail::fixed(r.logloss, 6);
    } else {
      out << ',';
    }
    out << ',' << detail::fixed(r.train_time_s, 3) << ',' << r.tag << ',';
    if (r.ok()) {
      out << rank[i];
    } else {
      out << "failed";
    }
    out << '\n';
  }
}

inline void write_report_csv(std::ostream& out, const Ledger& ledger) {
  write_report_csv(out, std::span<const EvalRecord>(ledger.entries()));
}

/// generation,best_auc with generations counted from 1.
inline void write_history_csv(std::ostream& out,
                              std::span<const double> history) {
  out << "generation,best_auc\n";
  for (std::size_t g = 0; g < history.size(); ++g) {
    out << g + 1 << ',' << detail::fixed(history[g], 6) << '\n';
  }
}

/// One canonical key per line.
inline void write_schedule(std::ostream& out,
                           std::span<const PlannedSubset> plan) {
  for (const auto& p : plan) out << p.subset.key() << '\n';
}

}  // namespace neshfs
