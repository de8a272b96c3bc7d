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

// Weighted Boxes Fusion of several detectors' outputs.
//
// Per image and class, detections are visited in descending effective
// confidence (score x normalized model weight). Each one joins the cluster
// whose running fused box overlaps it with IoU >= iou_fuse_threshold
// (highest IoU wins, earliest cluster on ties) or opens a new cluster. A
// cluster's box is the confidence-weighted mean of its members' corners and
// its score is mean(member confidence) * min(T, N) / N, where T is the
// member count and N the number of models with positive weight.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <iterator>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "detens/box.hpp"
#include "detens/error.hpp"
#include "detens/parallel.hpp"
#include "detens/types.hpp"

namespace detens {

struct FusionConfig {
  double iou_fuse_threshold = 0.7;
  double min_confidence = 0.001;
  // One entry per input run, in run order.
  std::vector<double> model_weights;
  // Divide weights by their mean so equal weights leave scores unchanged.
  bool normalize_weights = true;
  // Apply min_confidence to score x weight (true) or to the raw score.
  bool floor_on_weighted = true;
  std::string output_model_id = "ensemble";
};

inline void validate(const FusionConfig& config, std::size_t run_count) {
  if (config.model_weights.empty()) {
    throw ConfigError("fusion config has no model weights");
  }
  if (config.model_weights.size() != run_count) {
    throw ConfigError("fusion config has " +
                      std::to_string(config.model_weights.size()) +
                      " model weights for " + std::to_string(run_count) +
                      " runs");
  }
  bool any_positive = false;
  for (double w : config.model_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ConfigError("model weights must be finite and nonnegative");
    }
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw ConfigError("at least one model weight must be positive");
  if (!(config.iou_fuse_threshold > 0.0 && config.iou_fuse_threshold <= 1.0)) {
    throw ConfigError("iou_fuse_threshold must lie in (0, 1]");
  }
  if (!(config.min_confidence >= 0.0 && config.min_confidence < 1.0)) {
    throw ConfigError("min_confidence must lie in [0, 1)");
  }
}

// Weights actually applied to scores. With normalization on, weights are
// divided by their mean; identical weights map to exactly 1.
inline std::vector<double> effective_weights(const FusionConfig& config) {
  std::vector<double> out = config.model_weights;
  if (!config.normalize_weights || out.empty()) return out;
  const bool all_equal =
      std::all_of(out.begin(), out.end(), [&](double w) { return w == out.front(); });
  if (all_equal) {
    std::fill(out.begin(), out.end(), 1.0);
    return out;
  }
  double sum = 0.0;
  for (double w : out) sum += w;
  const double mean = sum / static_cast<double>(out.size());
  for (double& w : out) w /= mean;
  return out;
}

struct FusionMember {
  Detection detection;
  double confidence;  // effective (weighted) confidence
  std::size_t run;    // index of the source run
};

class FusionCluster {
 public:
  FusionCluster(CategoryId category, FusionMember first) : category_(category) {
    add(std::move(first));
  }

  void add(FusionMember m) {
    const BoundingBox& b = m.detection.box;
    const double c = m.confidence;
    sums_[0] += c * b.x_min();
    sums_[1] += c * b.y_min();
    sums_[2] += c * b.x_max();
    sums_[3] += c * b.y_max();
    weight_sum_ += c;
    fused_ = BoundingBox(sums_[0] / weight_sum_, sums_[1] / weight_sum_,
                         sums_[2] / weight_sum_, sums_[3] / weight_sum_);
    members_.push_back(std::move(m));
  }

  CategoryId category() const { return category_; }
  const std::vector<FusionMember>& members() const { return members_; }
  const BoundingBox& fused_box() const { return fused_; }

  // Mean member confidence rescaled by min(T, N) / N, clamped to [0, 1].
  double fused_score(std::size_t active_models) const {
    const double t = static_cast<double>(members_.size());
    const double n = static_cast<double>(active_models);
    const double mean = weight_sum_ / t;
    return std::clamp(mean * std::min(t, n) / n, 0.0, 1.0);
  }

 private:
  CategoryId category_;
  std::vector<FusionMember> members_;
  std::array<double, 4> sums_{0.0, 0.0, 0.0, 0.0};
  double weight_sum_ = 0.0;
  BoundingBox fused_;
};

namespace detail {

inline std::size_t active_model_count(const std::vector<double>& weights) {
  return static_cast<std::size_t>(
      std::count_if(weights.begin(), weights.end(), [](double w) { return w > 0.0; }));
}

}  // namespace detail

// Clusters of one image, in creation order grouped by ascending category.
// Detections with zero effective confidence carry no weight and are dropped
// along with those under the confidence floor.
inline std::vector<FusionCluster> cluster_image(std::span<const ModelRun> runs,
                                                const FusionConfig& config) {
  validate(config, runs.size());
  const std::vector<double> weights = effective_weights(config);

  struct Candidate {
    const Detection* det;
    double confidence;
    std::size_t run;
    std::size_t index;
  };
  std::map<CategoryId, std::vector<Candidate>> by_class;
  const ImageId* image = nullptr;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& dets = runs[r].detections;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      const Detection& d = dets[i];
      if (image == nullptr) {
        image = &d.image_id;
      } else if (d.image_id != *image) {
        throw ValidationError("fuse_image received detections from images '" +
                              *image + "' and '" + d.image_id + "'");
      }
      const double conf = d.score * weights[r];
      const double floored = config.floor_on_weighted ? conf : d.score;
      if (floored < config.min_confidence || !(conf > 0.0)) continue;
      by_class[d.category_id].push_back(Candidate{&d, conf, r, i});
    }
  }

  std::vector<FusionCluster> out;
  for (auto& [category, cands] : by_class) {
    std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
      if (a.confidence != b.confidence) return a.confidence > b.confidence;
      const auto& ma = runs[a.run].model_id;
      const auto& mb = runs[b.run].model_id;
      if (ma != mb) return ma < mb;
      if (a.run != b.run) return a.run < b.run;
      return a.index < b.index;
    });
    const std::size_t first = out.size();
    for (const Candidate& c : cands) {
      std::size_t best = out.size();
      double best_iou = -1.0;
      for (std::size_t k = first; k < out.size(); ++k) {
        const double v = iou(out[k].fused_box(), c.det->box);
        if (v >= config.iou_fuse_threshold && v > best_iou) {
          best = k;
          best_iou = v;
        }
      }
      FusionMember m{*c.det, c.confidence, c.run};
      if (best == out.size()) {
        out.emplace_back(category, std::move(m));
      } else {
        out[best].add(std::move(m));
      }
    }
  }
  return out;
}

// Fuses the runs' detections for a single image. Output is sorted by
// descending fused score; ties keep category-then-creation order.
inline std::vector<Detection> fuse_image(std::span<const ModelRun> runs,
                                         const FusionConfig& config) {
  const std::vector<FusionCluster> clusters = cluster_image(runs, config);
  const std::size_t active = detail::active_model_count(config.model_weights);
  std::vector<Detection> out;
  out.reserve(clusters.size());
  for (const auto& cl : clusters) {
    out.push_back(Detection{cl.members().front().detection.image_id, cl.category(),
                            cl.fused_box(), cl.fused_score(active),
                            config.output_model_id});
  }
  std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    return a.score > b.score;
  });
  return out;
}

// Fuses every image independently. Images are processed (and emitted) in
// lexicographic image-id order regardless of `threads`.
inline ModelRun fuse_dataset(std::span<const ModelRun> runs, const FusionConfig& config,
                             unsigned threads = 1) {
  validate(config, runs.size());
  std::map<ImageId, std::vector<ModelRun>> per_image;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const Detection& d : runs[r].detections) {
      auto& slices = per_image[d.image_id];
      if (slices.empty()) {
        slices.resize(runs.size());
        for (std::size_t k = 0; k < runs.size(); ++k) {
          slices[k].model_id = runs[k].model_id;
          slices[k].ensemble_weight = runs[k].ensemble_weight;
        }
      }
      slices[r].detections.push_back(d);
    }
  }
  std::vector<const std::vector<ModelRun>*> work;
  work.reserve(per_image.size());
  for (const auto& [id, slices] : per_image) work.push_back(&slices);

  std::vector<std::vector<Detection>> results(work.size());
  parallel_for(work.size(), threads,
               [&](std::size_t i) { results[i] = fuse_image(*work[i], config); });

  ModelRun fused;
  fused.model_id = config.output_model_id;
  for (auto& r : results) {
    fused.detections.insert(fused.detections.end(), std::make_move_iterator(r.begin()),
                            std::make_move_iterator(r.end()));
  }
  return fused;
}

}  // namespace detens
