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

// Challenge-protocol detection metrics: greedy one-to-one IoU matching,
// per-class precision/recall curves, COCO 101-point AP, mAP50-95 over the
// ten-threshold ladder and the F1-optimal operating threshold.

#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "detens/box.hpp"
#include "detens/error.hpp"
#include "detens/parallel.hpp"
#include "detens/types.hpp"

namespace detens {

enum class ApMethod { kCoco101, kTrapezoid };

// 0.50, 0.55, ..., 0.95, each the double nearest the decimal value.
inline std::vector<double> coco_iou_ladder() {
  std::vector<double> out;
  for (int i = 0; i < 10; ++i) out.push_back((50.0 + 5.0 * i) / 100.0);
  return out;
}

struct EvalConfig {
  double min_confidence = 0.001;
  std::vector<double> iou_thresholds = coco_iou_ladder();
  // IoU used for PR curves, the per-class AP50 column, pooled AP and the
  // F1-optimal threshold.
  double pr_iou = 0.5;
  ApMethod ap_method = ApMethod::kCoco101;
  // Per image and class; 0 means unlimited.
  std::size_t max_detections_per_image = 0;
  unsigned threads = 1;
};

inline void validate(const EvalConfig& config) {
  if (config.iou_thresholds.empty()) throw ConfigError("no IoU thresholds given");
  for (std::size_t i = 0; i < config.iou_thresholds.size(); ++i) {
    const double t = config.iou_thresholds[i];
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("IoU thresholds must lie in (0, 1]");
    if (i > 0 && !(t > config.iou_thresholds[i - 1])) {
      throw ConfigError("IoU thresholds must be strictly increasing");
    }
  }
  if (!(config.pr_iou > 0.0 && config.pr_iou <= 1.0)) {
    throw ConfigError("PR IoU must lie in (0, 1]");
  }
  if (!(config.min_confidence >= 0.0 && config.min_confidence < 1.0)) {
    throw ConfigError("min_confidence must lie in [0, 1)");
  }
}

struct DetectionMatch {
  bool true_positive = false;
  std::optional<std::size_t> gt_index;
  double iou = 0.0;  // IoU with the matched ground truth, 0 for false positives
};

struct MatchResult {
  std::vector<DetectionMatch> detections;  // parallel to the input detections
  std::size_t true_positives = 0;
  std::size_t false_negatives = 0;
};

// Greedy matching of one class on one image. Detections are visited by
// descending score (ties: input order); each takes the unmatched ground
// truth with the highest IoU >= iou_threshold (ties: lowest index).
inline MatchResult match_class_image(std::span<const Detection> dets,
                                     std::span<const GroundTruthBox> gts,
                                     double iou_threshold) {
  MatchResult result;
  result.detections.resize(dets.size());
  std::vector<std::size_t> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t d : order) {
    std::optional<std::size_t> best;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double v = iou(dets[d].box, gts[g].box);
      if (v >= iou_threshold && (!best || v > best_iou)) {
        best = g;
        best_iou = v;
      }
    }
    if (best) {
      taken[*best] = true;
      result.detections[d] = DetectionMatch{true, best, best_iou};
      ++result.true_positives;
    }
  }
  result.false_negatives = gts.size() - result.true_positives;
  return result;
}

struct PrPoint {
  double confidence;
  double precision;
  double recall;
};

struct PrCurve {
  CategoryId category_id = 0;
  double iou_threshold = 0.5;
  std::size_t num_gt = 0;
  std::vector<PrPoint> points;  // one per detection, descending confidence
};

// A detection's score and its TP flag after matching.
struct ScoredFlag {
  double score;
  bool true_positive;
};

inline PrCurve curve_from_flags(std::vector<ScoredFlag> flags, std::size_t num_gt,
                                CategoryId category, double iou_threshold) {
  std::stable_sort(flags.begin(), flags.end(), [](const ScoredFlag& a, const ScoredFlag& b) {
    return a.score > b.score;
  });
  PrCurve curve{category, iou_threshold, num_gt, {}};
  curve.points.reserve(flags.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i].true_positive) ++tp;
    const double precision = static_cast<double>(tp) / static_cast<double>(i + 1);
    const double recall =
        num_gt == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(num_gt);
    curve.points.push_back(PrPoint{flags[i].score, precision, recall});
  }
  return curve;
}

namespace detail {

// Detections and ground truth of one class, grouped by image in canonical
// image order.
struct ClassSlice {
  std::vector<std::vector<Detection>> dets;
  std::vector<std::vector<GroundTruthBox>> gts;
  std::size_t num_gt = 0;
};

inline ClassSlice slice_class(std::span<const Detection> dets, const GroundTruthSet& gts,
                              CategoryId category) {
  ClassSlice s;
  std::map<ImageId, std::size_t> slot;
  for (const auto& [id, boxes] : gts.images()) {
    slot.emplace(id, s.gts.size());
    s.gts.emplace_back();
    for (const auto& b : boxes) {
      if (b.category_id == category) s.gts.back().push_back(b);
    }
    s.num_gt += s.gts.back().size();
  }
  s.dets.resize(s.gts.size());
  for (const auto& d : dets) {
    if (d.category_id != category) continue;
    auto it = slot.find(d.image_id);
    if (it == slot.end()) {
      throw ValidationError("detection references image '" + d.image_id +
                            "' absent from ground truth");
    }
    s.dets[it->second].push_back(d);
  }
  return s;
}

inline std::vector<ScoredFlag> match_slice(const ClassSlice& s, double iou_threshold) {
  std::vector<ScoredFlag> flags;
  for (std::size_t i = 0; i < s.dets.size(); ++i) {
    if (s.dets[i].empty()) continue;
    const MatchResult m = match_class_image(s.dets[i], s.gts[i], iou_threshold);
    for (std::size_t k = 0; k < s.dets[i].size(); ++k) {
      flags.push_back(ScoredFlag{s.dets[i][k].score, m.detections[k].true_positive});
    }
  }
  return flags;
}

}  // namespace detail

// Pools one class's detections across images (matching is per image) and
// traces precision/recall at every detection in descending score order.
inline PrCurve pr_curve(std::span<const Detection> dets, const GroundTruthSet& gts,
                        CategoryId category, double iou_threshold) {
  const detail::ClassSlice s = detail::slice_class(dets, gts, category);
  if (s.num_gt == 0) {
    throw EvaluationError("class " + std::to_string(category) +
                          " has no ground truth; its PR curve is undefined");
  }
  return curve_from_flags(detail::match_slice(s, iou_threshold), s.num_gt, category,
                          iou_threshold);
}

inline double average_precision(const PrCurve& curve,
                                ApMethod method = ApMethod::kCoco101) {
  const auto& pts = curve.points;
  if (pts.empty()) return 0.0;
  if (method == ApMethod::kTrapezoid) {
    double area = 0.0;
    double prev_r = 0.0;
    double prev_p = pts.front().precision;
    for (const auto& p : pts) {
      area += (p.recall - prev_r) * (p.precision + prev_p) / 2.0;
      prev_r = p.recall;
      prev_p = p.precision;
    }
    return std::clamp(area, 0.0, 1.0);
  }
  // Precision envelope: max precision at any recall >= r.
  std::vector<double> envelope(pts.size());
  double running = 0.0;
  for (std::size_t i = pts.size(); i-- > 0;) {
    running = std::max(running, pts[i].precision);
    envelope[i] = running;
  }
  double sum = 0.0;
  std::size_t j = 0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    while (j < pts.size() && pts[j].recall < r) ++j;
    if (j == pts.size()) break;
    sum += envelope[j];
  }
  return sum / 101.0;
}

struct ClassOperatingPoint {
  CategoryId category_id = 0;
  std::string name;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t num_gt = 0;
  double precision = 0.0;
  double recall = 0.0;
};

struct F1Report {
  double threshold = 0.0;
  double f1 = 0.0;  // micro-averaged over evaluated classes
  double precision = 0.0;
  double recall = 0.0;
  std::vector<ClassOperatingPoint> classes;
};

struct ClassMetrics {
  CategoryId category_id = 0;
  std::string name;
  std::size_t num_gt = 0;
  std::size_t num_detections = 0;
  std::vector<double> ap;  // one per IoU threshold
  double ap_50_95 = 0.0;   // mean of `ap`
  double ap_pr_iou = 0.0;  // AP at EvalConfig::pr_iou
  PrCurve pr_curve;        // at EvalConfig::pr_iou
};

struct MetricsReport {
  std::vector<double> iou_thresholds;
  double pr_iou = 0.5;
  double min_confidence = 0.001;
  ApMethod ap_method = ApMethod::kCoco101;
  std::vector<ClassMetrics> classes;  // evaluated classes (at least one GT)
  double map_50_95 = 0.0;
  double mean_ap_pr_iou = 0.0;    // class-mean AP at pr_iou
  double pooled_ap_pr_iou = 0.0;  // AP of all classes pooled into one curve
  F1Report f1;
  std::vector<std::string> ignored_classes;  // had detections but no GT
  std::size_t ignored_detections = 0;
  std::vector<std::string> warnings;
};

namespace detail {

// Micro-F1 sweep over candidate thresholds {distinct scores} U {0}; ties go
// to the largest threshold. Greedy matching is prefix-stable in score order,
// so TP/FP counts at threshold t are those of the detections scoring >= t.
inline F1Report f1_sweep(const std::vector<std::vector<ScoredFlag>>& per_class,
                         const std::vector<std::size_t>& num_gt,
                         const std::vector<const ClassId*>& classes) {
  struct Tagged {
    double score;
    bool tp;
    std::size_t cls;
  };
  std::vector<Tagged> all;
  std::size_t total_gt = 0;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    total_gt += num_gt[c];
    for (const auto& f : per_class[c]) all.push_back({f.score, f.true_positive, c});
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const Tagged& a, const Tagged& b) { return a.score > b.score; });

  auto f1_of = [&](std::size_t tp, std::size_t fp) {
    const double denom = static_cast<double>(tp + fp + total_gt);
    return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
  };

  double best_threshold = 0.0;
  double best_f1 = -1.0;
  std::size_t best_end = 0;  // number of detections kept at the best threshold
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) {
      (all[j].tp ? tp : fp) += 1;
      ++j;
    }
    const double f = f1_of(tp, fp);
    if (f > best_f1) {
      best_f1 = f;
      best_threshold = all[i].score;
      best_end = j;
    }
    i = j;
  }
  if (f1_of(tp, fp) > best_f1) {  // threshold 0 keeps everything
    best_f1 = f1_of(tp, fp);
    best_threshold = 0.0;
    best_end = all.size();
  }

  F1Report report;
  report.threshold = best_threshold;
  report.f1 = best_f1;
  std::vector<std::size_t> ctp(per_class.size(), 0), cfp(per_class.size(), 0);
  for (std::size_t i = 0; i < best_end; ++i) (all[i].tp ? ctp : cfp)[all[i].cls] += 1;
  std::size_t sum_tp = 0, sum_fp = 0;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    ClassOperatingPoint op;
    op.category_id = classes[c]->category_id;
    op.name = classes[c]->name;
    op.true_positives = ctp[c];
    op.false_positives = cfp[c];
    op.num_gt = num_gt[c];
    op.precision = ctp[c] + cfp[c] == 0
                       ? 0.0
                       : static_cast<double>(ctp[c]) / static_cast<double>(ctp[c] + cfp[c]);
    op.recall = num_gt[c] == 0 ? 0.0
                               : static_cast<double>(ctp[c]) / static_cast<double>(num_gt[c]);
    sum_tp += ctp[c];
    sum_fp += cfp[c];
    report.classes.push_back(std::move(op));
  }
  report.precision = sum_tp + sum_fp == 0 ? 0.0
                                          : static_cast<double>(sum_tp) /
                                                static_cast<double>(sum_tp + sum_fp);
  report.recall =
      total_gt == 0 ? 0.0 : static_cast<double>(sum_tp) / static_cast<double>(total_gt);
  return report;
}

struct PreparedRun {
  std::vector<const ClassId*> evaluated;  // classes with >= 1 GT
  std::vector<ClassSlice> slices;         // parallel to `evaluated`
  std::vector<std::string> ignored_classes;
  std::size_t ignored_detections = 0;
};

// Validates detections against the ground truth, drops those under the
// confidence floor, applies the per-image cap and splits by class.
inline PreparedRun prepare(const ModelRun& run, const GroundTruthSet& gts,
                           double min_confidence, std::size_t max_per_image) {
  const ClassCatalog& catalog = gts.catalog();
  std::set<ImageId> unknown_images;
  std::set<CategoryId> unknown_classes;
  std::vector<Detection> kept;
  for (const Detection& d : run.detections) {
    if (!gts.has_image(d.image_id)) unknown_images.insert(d.image_id);
    if (!catalog.contains(d.category_id)) unknown_classes.insert(d.category_id);
    if (d.score >= min_confidence) kept.push_back(d);
  }
  if (!unknown_images.empty()) {
    std::string msg = "detections reference images absent from ground truth:";
    std::size_t listed = 0;
    for (const auto& id : unknown_images) {
      if (listed++ == 20) {
        msg += " ...";
        break;
      }
      msg += " " + id;
    }
    throw ValidationError(msg);
  }
  if (!unknown_classes.empty()) {
    std::string msg = "detections reference unknown categories:";
    for (auto id : unknown_classes) msg += " " + std::to_string(id);
    throw ValidationError(msg);
  }

  if (max_per_image > 0) {
    std::map<std::pair<ImageId, CategoryId>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      groups[{kept[i].image_id, kept[i].category_id}].push_back(i);
    }
    std::vector<bool> keep(kept.size(), true);
    for (auto& [key, idx] : groups) {
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return kept[a].score > kept[b].score;
      });
      for (std::size_t k = max_per_image; k < idx.size(); ++k) keep[idx[k]] = false;
    }
    std::vector<Detection> capped;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (keep[i]) capped.push_back(std::move(kept[i]));
    }
    kept = std::move(capped);
  }

  PreparedRun prepared;
  std::vector<std::size_t> gt_counts(catalog.size(), 0);
  for (const auto& [id, boxes] : gts.images()) {
    for (const auto& b : boxes) ++gt_counts[*catalog.index_of(b.category_id)];
  }
  std::vector<std::size_t> det_counts(catalog.size(), 0);
  for (const auto& d : kept) ++det_counts[*catalog.index_of(d.category_id)];
  for (const ClassId& c : catalog.classes()) {
    if (gt_counts[c.index] == 0) {
      if (det_counts[c.index] > 0) {
        prepared.ignored_classes.push_back(c.name);
        prepared.ignored_detections += det_counts[c.index];
      }
      continue;
    }
    prepared.evaluated.push_back(&c);
    prepared.slices.push_back(slice_class(kept, gts, c.category_id));
  }
  return prepared;
}

}  // namespace detail

// Micro-averaged F1-optimal operating threshold at `iou_threshold`, with the
// per-class precision and recall at that threshold.
inline F1Report f1_optimal_threshold(const ModelRun& run, const GroundTruthSet& gts,
                                     double iou_threshold, double min_confidence = 0.0) {
  const detail::PreparedRun prepared = detail::prepare(run, gts, min_confidence, 0);
  if (prepared.evaluated.empty()) {
    throw EvaluationError("no class has ground truth; nothing to evaluate");
  }
  std::vector<std::vector<ScoredFlag>> flags;
  std::vector<std::size_t> num_gt;
  for (const auto& s : prepared.slices) {
    flags.push_back(detail::match_slice(s, iou_threshold));
    num_gt.push_back(s.num_gt);
  }
  return detail::f1_sweep(flags, num_gt, prepared.evaluated);
}

// Full challenge-protocol evaluation of one run. Work is split over
// (class, IoU threshold) pairs; each task writes its own slot, so results
// are identical for any thread count.
inline MetricsReport map_50_95(const ModelRun& run, const GroundTruthSet& gts,
                               const EvalConfig& config = {}) {
  validate(config);
  const detail::PreparedRun prepared = detail::prepare(
      run, gts, config.min_confidence, config.max_detections_per_image);
  if (prepared.evaluated.empty()) {
    throw EvaluationError("no class has ground truth; nothing to evaluate");
  }

  const std::size_t n_classes = prepared.evaluated.size();
  const std::size_t n_thr = config.iou_thresholds.size();
  // Slot n_thr of each class holds the pr_iou matching.
  const std::size_t per_class = n_thr + 1;
  std::vector<std::vector<ScoredFlag>> flags(n_classes * per_class);
  std::vector<double> ap(n_classes * per_class, 0.0);
  parallel_for(flags.size(), config.threads, [&](std::size_t task) {
    const std::size_t c = task / per_class;
    const std::size_t t = task % per_class;
    const double thr = t < n_thr ? config.iou_thresholds[t] : config.pr_iou;
    flags[task] = detail::match_slice(prepared.slices[c], thr);
    const PrCurve curve = curve_from_flags(flags[task], prepared.slices[c].num_gt,
                                           prepared.evaluated[c]->category_id, thr);
    ap[task] = average_precision(curve, config.ap_method);
  });

  MetricsReport report;
  report.iou_thresholds = config.iou_thresholds;
  report.pr_iou = config.pr_iou;
  report.min_confidence = config.min_confidence;
  report.ap_method = config.ap_method;
  report.ignored_classes = prepared.ignored_classes;
  report.ignored_detections = prepared.ignored_detections;
  for (const auto& name : prepared.ignored_classes) {
    report.warnings.push_back("class '" + name +
                              "' has detections but no ground truth; excluded");
  }

  double map_sum = 0.0;
  double ap_pr_sum = 0.0;
  std::vector<std::vector<ScoredFlag>> pr_flags;
  std::vector<std::size_t> num_gt;
  std::vector<ScoredFlag> pooled;
  std::size_t pooled_gt = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    ClassMetrics m;
    m.category_id = prepared.evaluated[c]->category_id;
    m.name = prepared.evaluated[c]->name;
    m.num_gt = prepared.slices[c].num_gt;
    for (const auto& v : prepared.slices[c].dets) m.num_detections += v.size();
    double sum = 0.0;
    for (std::size_t t = 0; t < n_thr; ++t) {
      m.ap.push_back(ap[c * per_class + t]);
      sum += m.ap.back();
    }
    m.ap_50_95 = sum / static_cast<double>(n_thr);
    m.ap_pr_iou = ap[c * per_class + n_thr];
    const auto& f = flags[c * per_class + n_thr];
    m.pr_curve = curve_from_flags(f, m.num_gt, m.category_id, config.pr_iou);
    map_sum += m.ap_50_95;
    ap_pr_sum += m.ap_pr_iou;
    pooled.insert(pooled.end(), f.begin(), f.end());
    pooled_gt += m.num_gt;
    pr_flags.push_back(f);
    num_gt.push_back(m.num_gt);
    report.classes.push_back(std::move(m));
  }
  report.map_50_95 = map_sum / static_cast<double>(n_classes);
  report.mean_ap_pr_iou = ap_pr_sum / static_cast<double>(n_classes);
  report.pooled_ap_pr_iou = average_precision(
      curve_from_flags(std::move(pooled), pooled_gt, 0, config.pr_iou), config.ap_method);
  report.f1 = detail::f1_sweep(pr_flags, num_gt, prepared.evaluated);
  return report;
}

}  // namespace detens
