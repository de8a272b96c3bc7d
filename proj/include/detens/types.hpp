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

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "detens/box.hpp"
#include "detens/error.hpp"

namespace detens {

// External class key as it appears in interchange documents (COCO
// `category_id`).
using CategoryId = std::int64_t;

using ImageId = std::string;

struct ClassId {
  std::size_t index = 0;  // position within the owning catalog, 0..K-1
  std::string name;
  CategoryId category_id = 0;

  bool operator==(const ClassId&) const = default;
};

// Ordered set of classes, optionally carrying per-class instance counts.
// Classes are kept in ascending category-id order so indices are stable
// across runs.
class ClassCatalog {
 public:
  ClassCatalog() = default;

  struct Entry {
    CategoryId category_id;
    std::string name;
  };

  explicit ClassCatalog(std::vector<Entry> entries,
                        std::optional<std::vector<std::uint64_t>> counts = {}) {
    if (counts && counts->size() != entries.size()) {
      throw ValidationError("class count vector does not match class list");
    }
    std::vector<std::size_t> order(entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return entries[a].category_id < entries[b].category_id;
    });
    std::unordered_set<std::string> names;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      Entry& e = entries[order[pos]];
      if (e.name.empty()) throw ValidationError("class name must be nonempty");
      if (!names.insert(e.name).second) {
        throw ValidationError("duplicate class name '" + e.name + "'");
      }
      if (by_category_.count(e.category_id)) {
        throw ValidationError("duplicate category id " +
                              std::to_string(e.category_id));
      }
      by_category_.emplace(e.category_id, pos);
      classes_.push_back(ClassId{pos, std::move(e.name), e.category_id});
    }
    if (counts) {
      // All-zero counts are representable (an empty ground-truth set); the
      // weight schemes reject them.
      std::vector<std::uint64_t> sorted(counts->size());
      for (std::size_t pos = 0; pos < order.size(); ++pos) {
        sorted[pos] = (*counts)[order[pos]];
      }
      counts_ = std::move(sorted);
    }
  }

  const std::vector<ClassId>& classes() const { return classes_; }
  std::size_t size() const { return classes_.size(); }
  bool empty() const { return classes_.empty(); }
  const ClassId& operator[](std::size_t index) const { return classes_.at(index); }

  std::optional<std::size_t> index_of(CategoryId id) const {
    auto it = by_category_.find(id);
    if (it == by_category_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> index_of_name(const std::string& name) const {
    for (const auto& c : classes_) {
      if (c.name == name) return c.index;
    }
    return std::nullopt;
  }

  bool contains(CategoryId id) const { return by_category_.count(id) > 0; }

  const std::optional<std::vector<std::uint64_t>>& counts() const { return counts_; }

  std::uint64_t total_count() const {
    std::uint64_t total = 0;
    if (counts_) {
      for (auto c : *counts_) total += c;
    }
    return total;
  }

  ClassCatalog with_counts(std::vector<std::uint64_t> counts) const {
    std::vector<Entry> entries;
    for (const auto& c : classes_) entries.push_back({c.category_id, c.name});
    return ClassCatalog(std::move(entries), std::move(counts));
  }

 private:
  std::vector<ClassId> classes_;
  std::unordered_map<CategoryId, std::size_t> by_category_;
  std::optional<std::vector<std::uint64_t>> counts_;
};

struct Detection {
  ImageId image_id;
  CategoryId category_id = 0;
  BoundingBox box;
  double score = 0.0;
  std::string model_id;

  bool operator==(const Detection&) const = default;
};

struct GroundTruthBox {
  ImageId image_id;
  CategoryId category_id = 0;
  BoundingBox box;

  bool operator==(const GroundTruthBox&) const = default;
};

// Reference boxes keyed by image. Images without annotations are kept as
// empty entries so that false positives on them are scored. std::map gives
// the canonical (lexicographic) image order used throughout.
class GroundTruthSet {
 public:
  GroundTruthSet() = default;
  explicit GroundTruthSet(ClassCatalog catalog) : catalog_(std::move(catalog)) {}

  const ClassCatalog& catalog() const { return catalog_; }
  const std::map<ImageId, std::vector<GroundTruthBox>>& images() const {
    return images_;
  }

  void add_image(const ImageId& id) { images_[id]; }

  void add(GroundTruthBox box) {
    if (!catalog_.contains(box.category_id)) {
      throw ValidationError("ground-truth box references unknown category " +
                            std::to_string(box.category_id));
    }
    images_[box.image_id].push_back(std::move(box));
  }

  bool has_image(const ImageId& id) const { return images_.count(id) > 0; }

  std::size_t box_count() const {
    std::size_t n = 0;
    for (const auto& [id, boxes] : images_) n += boxes.size();
    return n;
  }

 private:
  ClassCatalog catalog_;
  std::map<ImageId, std::vector<GroundTruthBox>> images_;
};

// One model's detections over a dataset, plus the weight it carries in an
// ensemble.
struct ModelRun {
  std::string model_id;
  std::vector<Detection> detections;
  double ensemble_weight = 1.0;
};

// Ground truth together with the detection runs evaluated or fused against
// it.
struct DatasetBundle {
  GroundTruthSet ground_truth;
  std::vector<ModelRun> runs;
};

}  // namespace detens
