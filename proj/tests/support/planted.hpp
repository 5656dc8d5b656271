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

// Planted-feature CTR data: labels are Bernoulli draws driven only by the
// informative columns, so the informative set is known by construction.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "neshfs/random.hpp"

namespace neshfs::testing {

struct PlantedDataset {
  std::string csv_path;
  std::string schema_path;
  std::vector<std::string> informative_numerical;
  std::vector<std::string> informative_categorical;
  std::vector<std::string> noise_categorical;
};

struct PlantedShape {
  std::size_t rows = 20000;
  std::size_t informative_cardinality = 8;
  std::size_t noise_cardinality = 100;
  std::size_t noise_features = 10;
};

inline PlantedDataset write_planted_dataset(const std::filesystem::path& dir,
                                            std::uint64_t seed,
                                            const PlantedShape& shape = {}) {
  std::filesystem::create_directories(dir);
  PlantedDataset out;
  out.informative_numerical = {"x1", "x2", "x3"};
  out.informative_categorical = {"c1", "c2", "c3", "c4"};
  char buf[32];
  for (std::size_t i = 1; i <= shape.noise_features; ++i) {
    std::snprintf(buf, sizeof buf, "z%02zu", i);
    out.noise_categorical.push_back(buf);
  }

  Rng rng(seed);
  const double weights[3] = {2.5, -2.0, 1.5};
  std::vector<std::vector<double>> effects(4);
  for (auto& e : effects) {
    for (std::size_t v = 0; v < shape.informative_cardinality; ++v) {
      e.push_back(rng.uniform(-1.2, 1.2));
    }
  }

  out.csv_path = (dir / "planted.csv").string();
  std::ofstream csv(out.csv_path);
  csv << "click";
  for (const auto& n : out.informative_numerical) csv << ',' << n;
  for (const auto& n : out.informative_categorical) csv << ',' << n;
  for (const auto& n : out.noise_categorical) csv << ',' << n;
  csv << ",row_id\n";
  for (std::size_t r = 0; r < shape.rows; ++r) {
    double x[3];
    double logit = -0.5;
    for (int f = 0; f < 3; ++f) {
      x[f] = rng.uniform();
      logit += weights[f] * (x[f] - 0.5);
    }
    std::size_t cats[4];
    for (int f = 0; f < 4; ++f) {
      cats[f] = rng.index(shape.informative_cardinality);
      logit += effects[f][cats[f]];
    }
    std::vector<std::size_t> noise(shape.noise_features);
    for (auto& z : noise) z = rng.index(shape.noise_cardinality);
    const double p = 1.0 / (1.0 + std::exp(-logit));
    csv << (rng.bernoulli(p) ? 1 : 0);
    for (double v : x) {
      std::snprintf(buf, sizeof buf, "%.6f", v * 10.0);
      csv << ',' << buf;
    }
    for (int f = 0; f < 4; ++f) csv << ",v" << cats[f];
    for (auto z : noise) csv << ",n" << z;
    csv << ',' << r << '\n';
  }

  nlohmann::json schema;
  schema["label"] = "click";
  schema["numerical"] = out.informative_numerical;
  std::vector<std::string> categorical = out.informative_categorical;
  categorical.insert(categorical.end(), out.noise_categorical.begin(),
                     out.noise_categorical.end());
  schema["categorical"] = categorical;
  schema["ignored"] = {"row_id"};
  schema["missing_token"] = "";
  out.schema_path = (dir / "schema.json").string();
  std::ofstream(out.schema_path) << schema.dump(2) << '\n';
  return out;
}

inline std::string write_json_file(const std::filesystem::path& path,
                                   const nlohmann::json& doc) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path) << doc.dump(2) << '\n';
  return path.string();
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// A fresh directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("neshfs_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace neshfs::testing
