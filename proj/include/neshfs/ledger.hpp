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

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "neshfs/error.hpp"
#include "neshfs/subset.hpp"

namespace neshfs {

/// Metrics of one evaluated feature subset.
struct EvalRecord {
  std::string subset_key;
  std::vector<std::string> features;  // kept names, numerical then categorical
  std::size_t n_numerical = 0;
  std::size_t n_categorical = 0;
  double auc = 0.0;
  double logloss = 0.0;
  double train_time_s = 0.0;
  std::size_t epochs_run = 0;
  std::string tag;        // base | general | <k>-u | <k>-d | ga
  std::string timestamp;  // UTC ISO-8601, empty when timing is disabled
  std::string error;      // non-empty marks a failed evaluation

  bool ok() const { return error.empty(); }
  std::size_t n_features() const { return n_numerical + n_categorical; }

  static EvalRecord for_subset(const FeatureSubset& subset) {
    EvalRecord r;
    r.subset_key = subset.key();
    r.features = subset.kept();
    r.n_numerical = subset.kept_numerical.size();
    r.n_categorical = subset.kept_categorical.size();
    return r;
  }

  static EvalRecord failure(const FeatureSubset& subset, std::string message) {
    EvalRecord r = for_subset(subset);
    r.error = message.empty() ? "unknown error" : std::move(message);
    return r;
  }
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json to_json(const EvalRecord& r) {
  nlohmann::json j;
  j["key"] = r.subset_key;
  j["n_numerical"] = r.n_numerical;
  j["n_categorical"] = r.n_categorical;
  j["features"] = r.features;
  if (r.ok()) {
    j["auc"] = r.auc;
    j["logloss"] = r.logloss;
  } else {
    j["auc"] = nullptr;
    j["logloss"] = nullptr;
  }
  j["train_time_s"] = r.train_time_s;
  j["epochs_run"] = r.epochs_run;
  j["tag"] = r.tag;
  j["timestamp"] = r.timestamp;
  if (!r.ok()) j["error"] = r.error;
  return j;
}

inline EvalRecord record_from_json(const nlohmann::json& j) {
  EvalRecord r;
  r.subset_key = j.at("key").get<std::string>();
  r.n_numerical = j.at("n_numerical").get<std::size_t>();
  r.n_categorical = j.at("n_categorical").get<std::size_t>();
  r.features = j.at("features").get<std::vector<std::string>>();
  if (j.contains("error")) r.error = j.at("error").get<std::string>();
  if (r.ok()) {
    r.auc = j.at("auc").get<double>();
    r.logloss = j.at("logloss").get<double>();
  }
  r.train_time_s = j.at("train_time_s").get<double>();
  r.epochs_run = j.at("epochs_run").get<std::size_t>();
  r.tag = j.at("tag").get<std::string>();
  r.timestamp = j.value("timestamp", "");
  return r;
}

/// Deduplicating record of evaluated subsets, keyed by canonical key and kept
/// in insertion order. Optionally mirrored to an append-only JSON-lines file.
///
/// Not synchronized: callers serialize insertion.
class Ledger {
 public:
  Ledger() = default;
  Ledger(Ledger&&) noexcept = default;
  Ledger& operator=(Ledger&&) noexcept = default;

  /// Reads an existing ledger file; a missing file yields an empty ledger.
  static Ledger load(const std::string& path) {
    Ledger ledger;
    std::ifstream in(path);
    if (!in) return ledger;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        ledger.insert(record_from_json(nlohmann::json::parse(line)));
      } catch (const nlohmann::json::exception& e) {
        throw DataError("ledger " + path + ":" + std::to_string(line_no) +
                        ": " + e.what());
      }
    }
    return ledger;
  }

  /// Mirrors every later insertion to path. truncate starts the file afresh
  /// and rewrites the current entries.
  void attach(const std::string& path, bool truncate) {
    auto mode = std::ios::out | (truncate ? std::ios::trunc : std::ios::app);
    sink_ = std::make_unique<std::ofstream>(path, mode);
    if (!*sink_) throw Error("cannot open ledger file " + path);
    if (truncate) {
      for (const auto& r : entries_) write(r);
    }
  }

  bool contains(const std::string& key) const { return index_.count(key) > 0; }

  const EvalRecord* find(const std::string& key) const {
    auto it = index_.find(key);
    return it == index_.end() ? nullptr : &entries_[it->second];
  }

  /// Returns false (and stores nothing) when the key is already present.
  bool insert(EvalRecord record) {
    if (contains(record.subset_key)) return false;
    index_.emplace(record.subset_key, entries_.size());
    if (sink_) write(record);
    entries_.push_back(std::move(record));
    return true;
  }

  const std::vector<EvalRecord>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  void write(const EvalRecord& r) {
    *sink_ << to_json(r).dump() << '\n';
    sink_->flush();
  }

  std::vector<EvalRecord> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unique_ptr<std::ofstream> sink_;
};

}  // namespace neshfs
