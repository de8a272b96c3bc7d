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

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "detens/metrics.hpp"
#include "detens/wbf.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace detens::testing {

// Empty string when `fused` and the oracle clusters agree one-for-one
// (same class, corners and score within `tol`), else a description.
inline std::string compare_with_oracle(const std::vector<Detection>& fused,
                                       const std::vector<oracle::OracleFused>& expected,
                                       double tol = 1e-9) {
  if (fused.size() != expected.size()) {
    return "cluster count " + std::to_string(fused.size()) + " vs oracle " +
           std::to_string(expected.size());
  }
  std::vector<bool> used(expected.size(), false);
  for (const Detection& d : fused) {
    const auto c = oracle::corners(d.box);
    bool found = false;
    for (std::size_t k = 0; k < expected.size() && !found; ++k) {
      if (used[k] || expected[k].category != d.category_id) continue;
      bool close = std::abs(expected[k].score - d.score) <= tol;
      for (int i = 0; i < 4; ++i) close = close && std::abs(expected[k].box[i] - c[i]) <= tol;
      if (close) used[k] = found = true;
    }
    if (!found) return "fused detection without oracle counterpart";
  }
  return {};
}

inline std::string check_wbf_instance(const WbfInstance& inst) {
  FusionConfig cfg;
  cfg.iou_fuse_threshold = inst.iou_threshold;
  cfg.min_confidence = inst.min_confidence;
  cfg.model_weights = inst.weights;
  const auto out = fuse_image(inst.runs, cfg);
  const auto expected = oracle::brute_force_wbf(inst.runs, inst.weights, inst.iou_threshold,
                                                inst.min_confidence, true, true);
  return compare_with_oracle(out, expected);
}

// Empty string when greedy flags agree with the exhaustive oracle.
inline std::string check_match_instance(const MatchInstance& inst) {
  const MatchResult got = match_class_image(inst.dets, inst.gts, inst.iou_threshold);
  const oracle::OracleMatch want =
      oracle::exhaustive_greedy_match(inst.dets, inst.gts, inst.iou_threshold);
  for (std::size_t i = 0; i < inst.dets.size(); ++i) {
    if (got.detections[i].true_positive != want.gt_of[i].has_value()) {
      return "TP flag differs at detection " + std::to_string(i);
    }
    if (got.detections[i].gt_index != want.gt_of[i]) {
      return "matched ground truth differs at detection " + std::to_string(i);
    }
  }
  return {};
}

inline bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

inline bool bit_equal(const std::vector<Detection>& a, const std::vector<Detection>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (x.image_id != y.image_id || x.category_id != y.category_id ||
        x.model_id != y.model_id || !bit_equal(x.score, y.score) ||
        !bit_equal(x.box.x_min(), y.box.x_min()) || !bit_equal(x.box.y_min(), y.box.y_min()) ||
        !bit_equal(x.box.x_max(), y.box.x_max()) || !bit_equal(x.box.y_max(), y.box.y_max())) {
      return false;
    }
  }
  return true;
}

inline bool bit_equal(const MetricsReport& a, const MetricsReport& b) {
  if (!bit_equal(a.map_50_95, b.map_50_95) || !bit_equal(a.mean_ap_pr_iou, b.mean_ap_pr_iou) ||
      !bit_equal(a.pooled_ap_pr_iou, b.pooled_ap_pr_iou) ||
      !bit_equal(a.f1.threshold, b.f1.threshold) || !bit_equal(a.f1.f1, b.f1.f1) ||
      a.classes.size() != b.classes.size()) {
    return false;
  }
  for (std::size_t c = 0; c < a.classes.size(); ++c) {
    const auto& x = a.classes[c];
    const auto& y = b.classes[c];
    if (x.ap.size() != y.ap.size() || x.pr_curve.points.size() != y.pr_curve.points.size()) {
      return false;
    }
    for (std::size_t t = 0; t < x.ap.size(); ++t) {
      if (!bit_equal(x.ap[t], y.ap[t])) return false;
    }
    for (std::size_t i = 0; i < x.pr_curve.points.size(); ++i) {
      const auto& p = x.pr_curve.points[i];
      const auto& q = y.pr_curve.points[i];
      if (!bit_equal(p.confidence, q.confidence) || !bit_equal(p.precision, q.precision) ||
          !bit_equal(p.recall, q.recall)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace detens::testing
