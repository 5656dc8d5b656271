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
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "neshfs/csv.hpp"
#include "neshfs/error.hpp"
#include "neshfs/random.hpp"

namespace neshfs {

enum class FeatureKind : std::uint8_t { kNumerical, kCategorical };

inline const char* to_string(FeatureKind kind) {
  return kind == FeatureKind::kNumerical ? "numerical" : "categorical";
}

/// Column roles of a tabular CTR dataset.
struct FeatureSchema {
  std::string label_column;
  std::vector<std::string> numerical;
  std::vector<std::string> categorical;
  std::vector<std::string> ignored;
  std::string missing_token;  // empty field by default

  /// Throws SchemaError unless every column has exactly one role.
  void validate() const {
    if (label_column.empty()) throw SchemaError("schema: missing label column");
    std::set<std::string> seen{label_column};
    auto claim = [&](const std::vector<std::string>& group, const char* role) {
      for (const auto& name : group) {
        if (name.empty()) {
          throw SchemaError(std::string("schema: empty column name in ") + role);
        }
        if (!seen.insert(name).second) {
          throw SchemaError("schema: column '" + name +
                            "' assigned more than once (in " + role + ")");
        }
      }
    };
    claim(numerical, "numerical");
    claim(categorical, "categorical");
    claim(ignored, "ignored");
    if (numerical.empty() && categorical.empty()) {
      throw SchemaError("schema: no numerical or categorical features");
    }
  }
};

inline FeatureSchema schema_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("schema: expected a JSON object");
  FeatureSchema schema;
  try {
    if (!doc.contains("label")) throw SchemaError("schema: missing label column");
    schema.label_column = doc.at("label").get<std::string>();
    auto list = [&](const char* key) {
      return doc.contains(key) ? doc.at(key).get<std::vector<std::string>>()
                               : std::vector<std::string>{};
    };
    schema.numerical = list("numerical");
    schema.categorical = list("categorical");
    schema.ignored = list("ignored");
    if (doc.contains("missing_token")) {
      schema.missing_token = doc.at("missing_token").get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("schema: ") + e.what());
  }
  schema.validate();
  return schema;
}

inline FeatureSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("schema: cannot read " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("schema: " + path + ": " + e.what());
  }
  return schema_from_json(doc);
}

enum class Split : std::uint8_t { kTrain = 0, kVal = 1, kTest = 2 };

/// Label-encoded, scaled dataset. Immutable once split.
struct EncodedDataset {
  std::size_t row_count = 0;
  std::vector<std::uint8_t> label;
  std::vector<std::string> numerical_names;
  std::vector<std::string> categorical_names;
  // Column-major: numerical[f][row] in [0, 1], categorical[f][row] in
  // [0, vocab_sizes[f]) with 0 reserved for missing values.
  std::vector<std::vector<double>> numerical;
  std::vector<std::vector<std::uint32_t>> categorical;
  std::vector<std::uint32_t> vocab_sizes;
  std::vector<Split> split_assignment;

  std::vector<std::size_t> rows_in(Split which) const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < split_assignment.size(); ++r) {
      if (split_assignment[r] == which) rows.push_back(r);
    }
    return rows;
  }

  std::optional<std::size_t> numerical_index(const std::string& name) const {
    return find(numerical_names, name);
  }
  std::optional<std::size_t> categorical_index(const std::string& name) const {
    return find(categorical_names, name);
  }

 private:
  static std::optional<std::size_t> find(const std::vector<std::string>& names,
                                         const std::string& name) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
  }
};

namespace detail {

inline double parse_real(const std::string& token, const std::string& column) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first < last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last || !std::isfinite(value)) {
    throw DataError("non-numeric value '" + token + "' in column " + column);
  }
  return value;
}

inline std::size_t column_of(const std::vector<std::string>& header,
                             const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw SchemaError("schema: column '" + name + "' not found in CSV header");
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace detail

/// Encodes an in-memory table. Rows are sampled uniformly without replacement
/// when sample_n is below the row count; sampled rows keep file order.
inline EncodedDataset encode(const csv::Table& table, const FeatureSchema& schema,
                             std::optional<std::size_t> sample_n,
                             std::uint64_t seed) {
  schema.validate();
  if (table.rows.empty()) throw DataError("dataset has no data rows");
  const auto& header = table.header;
  for (const auto& name : schema.ignored) detail::column_of(header, name);

  std::vector<std::size_t> picked(table.rows.size());
  for (std::size_t r = 0; r < picked.size(); ++r) picked[r] = r;
  if (sample_n && *sample_n < picked.size()) {
    if (*sample_n == 0) throw DataError("sample_n must be positive");
    Rng rng(derive_seed(seed, 0x53414d50));
    // Partial Fisher-Yates: the first sample_n slots are a uniform sample.
    for (std::size_t i = 0; i < *sample_n; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.index(picked.size() - i));
      std::swap(picked[i], picked[j]);
    }
    picked.resize(*sample_n);
    std::sort(picked.begin(), picked.end());
  }

  EncodedDataset out;
  out.row_count = picked.size();
  out.numerical_names = schema.numerical;
  out.categorical_names = schema.categorical;
  out.split_assignment.assign(out.row_count, Split::kTrain);

  const auto label_col = detail::column_of(header, schema.label_column);
  out.label.reserve(out.row_count);
  for (auto r : picked) {
    const auto& token = table.rows[r][label_col];
    const double y = detail::parse_real(token, schema.label_column);
    if (y != 0.0 && y != 1.0) {
      throw DataError("label '" + token + "' is not 0 or 1");
    }
    out.label.push_back(static_cast<std::uint8_t>(y));
  }

  for (const auto& name : schema.numerical) {
    const auto col = detail::column_of(header, name);
    std::vector<double> values;
    values.reserve(out.row_count);
    for (auto r : picked) {
      const auto& token = table.rows[r][col];
      values.push_back(token == schema.missing_token
                           ? 0.0
                           : detail::parse_real(token, name));
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double min = *lo;
    const double range = *hi - *lo;
    for (auto& v : values) v = range > 0.0 ? (v - min) / range : 0.0;
    out.numerical.push_back(std::move(values));
  }

  for (const auto& name : schema.categorical) {
    const auto col = detail::column_of(header, name);
    std::unordered_map<std::string, std::uint32_t> ids;
    std::vector<std::uint32_t> values;
    values.reserve(out.row_count);
    for (auto r : picked) {
      const auto& token = table.rows[r][col];
      if (token == schema.missing_token) {
        values.push_back(0);
        continue;
      }
      auto [it, inserted] =
          ids.try_emplace(token, static_cast<std::uint32_t>(ids.size() + 1));
      values.push_back(it->second);
    }
    out.vocab_sizes.push_back(static_cast<std::uint32_t>(ids.size() + 1));
    out.categorical.push_back(std::move(values));
  }
  return out;
}

inline EncodedDataset ingest(const std::string& csv_path,
                             const FeatureSchema& schema,
                             std::optional<std::size_t> sample_n,
                             std::uint64_t seed) {
  return encode(csv::read(csv_path), schema, sample_n, seed);
}

using SplitRatios = std::array<double, 3>;

/// Row counts per split by largest remainder, so each count is within one
/// row of its exact proportion and the counts sum to n.
inline std::array<std::size_t, 3> split_counts(std::size_t n,
                                               const SplitRatios& ratios) {
  double total = 0.0;
  for (double r : ratios) {
    if (!(r > 0.0)) throw ConfigError("split ratios must all be positive");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1");
  }
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    const double exact = ratios[s] * static_cast<double>(n);
    // Guard against 0.8 * 10 = 7.999...
    const double rounded = std::floor(exact + 1e-9);
    counts[s] = static_cast<std::size_t>(rounded);
    remainder[s] = exact - rounded;
    assigned += counts[s];
  }
  while (assigned < n) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < 3; ++s) {
      if (remainder[s] > remainder[best]) best = s;
    }
    ++counts[best];
    remainder[best] = -1.0;
    ++assigned;
  }
  return counts;
}

/// Assigns train/val/test tags by a seeded shuffle of row indices.
inline EncodedDataset split(EncodedDataset dataset, const SplitRatios& ratios,
                            std::uint64_t seed) {
  const auto counts = split_counts(dataset.row_count, ratios);
  std::vector<std::size_t> order(dataset.row_count);
  for (std::size_t r = 0; r < order.size(); ++r) order[r] = r;
  Rng rng(derive_seed(seed, 0x53504c54));
  rng.shuffle(std::span<std::size_t>(order));
  dataset.split_assignment.assign(dataset.row_count, Split::kTrain);
  std::size_t pos = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t c = 0; c < counts[s]; ++c) {
      dataset.split_assignment[order[pos++]] = static_cast<Split>(s);
    }
  }
  return dataset;
}

}  // namespace neshfs
