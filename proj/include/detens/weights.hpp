/* Copyright 2026 The detens Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Class-imbalance weights.
//
//   loss_log:      w_k = -log(p_k),           p_k = c_k / sum_i c_i
//   sampler_sqrt:  w_k = sqrt(sum_i c_i / c_k)
//
// Images are then weighted for sampling by the arithmetic mean of the
// sampler weights of the classes they contain.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "detens/error.hpp"
#include "detens/types.hpp"

namespace detens {

enum class WeightScheme { kLossLog, kSamplerSqrt };

inline const char* scheme_name(WeightScheme s) {
  return s == WeightScheme::kLossLog ? "loss_log" : "sampler_sqrt";
}

inline std::optional<WeightScheme> parse_scheme(const std::string& s) {
  if (s == "loss_log" || s == "loss-log") return WeightScheme::kLossLog;
  if (s == "sampler_sqrt" || s == "sampler-sqrt") return WeightScheme::kSamplerSqrt;
  return std::nullopt;
}

enum class ImageAggregation {
  kDistinctClasses,  // mean over the distinct classes present
  kPerInstance,      // mean over every object instance
};

struct ClassWeight {
  std::string name;
  CategoryId category_id = 0;
  std::uint64_t count = 0;
  double frequency = 0.0;
  double weight = 0.0;
};

struct ImageWeight {
  ImageId image_id;
  double weight = 0.0;       // aggregated class weight
  double probability = 0.0;  // weight / normalization
};

struct ImageWeightTable {
  std::vector<ImageWeight> images;  // canonical image order
  double normalization = 0.0;       // sum of raw weights
};

struct ClassWeightTable {
  WeightScheme scheme = WeightScheme::kLossLog;
  std::vector<ClassWeight> classes;
  std::uint64_t total = 0;
  double log_base = std::numbers::e;  // loss_log only
  std::optional<ImageWeightTable> images;
  std::vector<std::string> warnings;

  const ClassWeight* find(const std::string& name) const {
    for (const auto& c : classes) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

namespace detail {

inline ClassWeightTable start_table(const ClassCatalog& catalog, WeightScheme scheme) {
  if (!catalog.counts()) {
    throw ConfigError("class catalog carries no instance counts");
  }
  const auto& counts = *catalog.counts();
  ClassWeightTable table;
  table.scheme = scheme;
  table.total = catalog.total_count();
  if (table.total == 0) throw ConfigError("total class count is zero");
  for (const ClassId& c : catalog.classes()) {
    const std::uint64_t n = counts[c.index];
    if (n == 0) throw DegenerateClassError(c.name);
    table.classes.push_back(ClassWeight{
        c.name, c.category_id, n,
        static_cast<double>(n) / static_cast<double>(table.total), 0.0});
  }
  return table;
}

}  // namespace detail

inline ClassWeightTable loss_weights(const ClassCatalog& catalog,
                                     double log_base = std::numbers::e) {
  if (!(log_base > 0.0) || log_base == 1.0 || !std::isfinite(log_base)) {
    throw ConfigError("log base must be positive and different from 1");
  }
  ClassWeightTable table = detail::start_table(catalog, WeightScheme::kLossLog);
  table.log_base = log_base;
  const double scale = log_base == std::numbers::e ? 1.0 : 1.0 / std::log(log_base);
  for (auto& c : table.classes) {
    c.weight = -std::log(c.frequency) * scale;
    if (c.weight == 0.0) c.weight = 0.0;  // -0.0 for a single class
  }
  if (table.classes.size() == 1) {
    table.warnings.push_back("single-class catalog: p = 1 gives weight 0 for '" +
                             table.classes.front().name + "'");
  }
  return table;
}

inline ClassWeightTable sampler_weights(const ClassCatalog& catalog) {
  ClassWeightTable table = detail::start_table(catalog, WeightScheme::kSamplerSqrt);
  for (auto& c : table.classes) {
    c.weight = std::sqrt(static_cast<double>(table.total) / static_cast<double>(c.count));
  }
  return table;
}

inline ClassCatalog counts_from_ground_truth(const GroundTruthSet& gts) {
  const ClassCatalog& catalog = gts.catalog();
  std::vector<std::uint64_t> counts(catalog.size(), 0);
  for (const auto& [id, boxes] : gts.images()) {
    for (const auto& b : boxes) ++counts[*catalog.index_of(b.category_id)];
  }
  std::vector<ClassCatalog::Entry> entries;
  for (const auto& c : catalog.classes()) entries.push_back({c.category_id, c.name});
  return ClassCatalog(std::move(entries), std::move(counts));
}

// Per-image sampling weights from a sampler_sqrt class table. Images
// without objects get the smallest nonzero image weight (or 1 if no image
// has objects) so they stay reachable by the sampler.
inline ImageWeightTable image_sampling_weights(
    const GroundTruthSet& gts, const ClassWeightTable& class_table,
    ImageAggregation aggregation = ImageAggregation::kDistinctClasses) {
  if (class_table.scheme != WeightScheme::kSamplerSqrt) {
    throw ConfigError("image sampling weights require a sampler_sqrt class table");
  }
  const ClassCatalog& catalog = gts.catalog();
  std::map<CategoryId, double> weight_of;
  for (const auto& [id, boxes] : gts.images()) {
    for (const auto& b : boxes) {
      if (weight_of.count(b.category_id)) continue;
      const std::string& name = catalog[*catalog.index_of(b.category_id)].name;
      const ClassWeight* w = class_table.find(name);
      if (w == nullptr) {
        throw ConfigError("class '" + name + "' appears in ground truth but not in the weight table");
      }
      weight_of.emplace(b.category_id, w->weight);
    }
  }

  ImageWeightTable table;
  std::optional<double> min_nonzero;
  for (const auto& [id, boxes] : gts.images()) {
    double w = 0.0;
    if (!boxes.empty()) {
      double sum = 0.0;
      std::size_t n = 0;
      if (aggregation == ImageAggregation::kPerInstance) {
        for (const auto& b : boxes) sum += weight_of.at(b.category_id);
        n = boxes.size();
      } else {
        std::set<CategoryId> present;
        for (const auto& b : boxes) present.insert(b.category_id);
        for (auto c : present) sum += weight_of.at(c);
        n = present.size();
      }
      w = sum / static_cast<double>(n);
      if (w > 0.0 && (!min_nonzero || w < *min_nonzero)) min_nonzero = w;
    }
    table.images.push_back(ImageWeight{id, w, 0.0});
  }
  for (auto& img : table.images) {
    if (img.weight == 0.0) img.weight = min_nonzero.value_or(1.0);
    table.normalization += img.weight;
  }
  for (auto& img : table.images) img.probability = img.weight / table.normalization;
  return table;
}

}  // namespace detens
