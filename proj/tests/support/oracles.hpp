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

// Brute-force reference implementations used only by tests. Nothing here
// calls into the library's fusion, matching or AP code; only the value
// types are shared.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "detens/types.hpp"

namespace detens::oracle {

using Corners = std::array<double, 4>;

inline Corners corners(const BoundingBox& b) {
  return {b.x_min(), b.y_min(), b.x_max(), b.y_max()};
}

inline double overlap_iou(const Corners& a, const Corners& b) {
  const double ix = std::max(0.0, std::min(a[2], b[2]) - std::max(a[0], b[0]));
  const double iy = std::max(0.0, std::min(a[3], b[3]) - std::max(a[1], b[1]));
  const double inter = ix * iy;
  if (inter <= 0.0) return 0.0;
  const double ua = (a[2] - a[0]) * (a[3] - a[1]);
  const double ub = (b[2] - b[0]) * (b[3] - b[1]);
  const double uni = ua + ub - inter;
  return uni > 0.0 ? std::min(1.0, inter / uni) : 0.0;
}

// ---------------------------------------------------------------------------
// Weighted Boxes Fusion by exhaustive re-clustering. Visit order is found by
// repeated selection of the best remaining candidate; each cluster's box is
// recomputed from its full member list whenever it is compared.

struct OracleFused {
  CategoryId category;
  Corners box;
  double score;
  std::size_t members;
};

inline std::vector<OracleFused> brute_force_wbf(const std::vector<ModelRun>& runs,
                                                const std::vector<double>& raw_weights,
                                                double iou_threshold, double min_confidence,
                                                bool normalize, bool floor_on_weighted) {
  std::vector<double> w = raw_weights;
  if (normalize) {
    bool equal = true;
    for (double v : w) equal = equal && v == w.front();
    if (equal) {
      for (double& v : w) v = 1.0;
    } else {
      double s = 0.0;
      for (double v : w) s += v;
      for (double& v : w) v /= s / static_cast<double>(w.size());
    }
  }
  std::size_t active = 0;
  for (double v : raw_weights) active += v > 0.0 ? 1 : 0;

  struct Cand {
    CategoryId cat;
    Corners box;
    double conf;
    std::string model;
    std::size_t run, index;
    bool used = false;
  };
  std::vector<Cand> cands;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (std::size_t i = 0; i < runs[r].detections.size(); ++i) {
      const auto& d = runs[r].detections[i];
      const double conf = d.score * w[r];
      if ((floor_on_weighted ? conf : d.score) < min_confidence) continue;
      if (conf <= 0.0) continue;
      cands.push_back({d.category_id, corners(d.box), conf, runs[r].model_id, r, i});
    }
  }
  auto better = [](const Cand& a, const Cand& b) {
    if (a.conf != b.conf) return a.conf > b.conf;
    return std::tie(a.model, a.run, a.index) < std::tie(b.model, b.run, b.index);
  };

  std::vector<CategoryId> cats;
  for (const auto& c : cands) {
    if (std::find(cats.begin(), cats.end(), c.cat) == cats.end()) cats.push_back(c.cat);
  }
  std::sort(cats.begin(), cats.end());

  std::vector<OracleFused> out;
  for (CategoryId cat : cats) {
    std::vector<std::vector<std::pair<Corners, double>>> clusters;
    auto fused_box = [](const std::vector<std::pair<Corners, double>>& members) {
      Corners sum{0, 0, 0, 0};
      double wsum = 0.0;
      for (const auto& [b, c] : members) {
        for (int k = 0; k < 4; ++k) sum[k] += c * b[k];
        wsum += c;
      }
      for (int k = 0; k < 4; ++k) sum[k] /= wsum;
      return sum;
    };
    for (;;) {
      Cand* next = nullptr;
      for (auto& c : cands) {
        if (c.used || c.cat != cat) continue;
        if (next == nullptr || better(c, *next)) next = &c;
      }
      if (next == nullptr) break;
      next->used = true;
      std::optional<std::size_t> best;
      double best_iou = 0.0;
      for (std::size_t k = 0; k < clusters.size(); ++k) {
        const double v = overlap_iou(fused_box(clusters[k]), next->box);
        if (v < iou_threshold) continue;
        if (!best || v > best_iou) {
          best = k;
          best_iou = v;
        }
      }
      if (best) {
        clusters[*best].emplace_back(next->box, next->conf);
      } else {
        clusters.push_back({{next->box, next->conf}});
      }
    }
    for (const auto& members : clusters) {
      double csum = 0.0;
      for (const auto& m : members) csum += m.second;
      const double t = static_cast<double>(members.size());
      const double n = static_cast<double>(active);
      double score = csum / t * std::min(t, n) / n;
      score = std::min(1.0, std::max(0.0, score));
      out.push_back({cat, fused_box(members), score, members.size()});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Greedy matching by exhaustive enumeration: among all one-to-one partial
// assignments respecting the IoU threshold, pick the one whose per-detection
// key (matched, IoU, -gt index), read in descending-score order, is
// lexicographically largest. That optimum is exactly what a greedy pass by
// score produces.

struct OracleMatch {
  std::vector<std::optional<std::size_t>> gt_of;  // per input detection
};

inline OracleMatch exhaustive_greedy_match(const std::vector<Detection>& dets,
                                           const std::vector<GroundTruthBox>& gts,
                                           double iou_threshold) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < dets.size(); ++i) order.push_back(i);
  // insertion sort keeps equal scores in input order
  for (std::size_t i = 1; i < order.size(); ++i) {
    for (std::size_t j = i; j > 0 && dets[order[j]].score > dets[order[j - 1]].score; --j) {
      std::swap(order[j], order[j - 1]);
    }
  }
  std::vector<std::vector<double>> m(dets.size(), std::vector<double>(gts.size()));
  for (std::size_t d = 0; d < dets.size(); ++d) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      m[d][g] = overlap_iou(corners(dets[d].box), corners(gts[g].box));
    }
  }

  using Key = std::vector<std::tuple<int, double, long>>;
  Key best_key;
  std::vector<std::optional<std::size_t>> best_assign(dets.size());
  std::vector<std::optional<std::size_t>> assign(dets.size());
  std::vector<bool> used(gts.size(), false);
  bool have_best = false;

  auto key_of = [&] {
    Key k;
    for (std::size_t d : order) {
      if (assign[d]) {
        k.emplace_back(1, m[d][*assign[d]], -static_cast<long>(*assign[d]));
      } else {
        k.emplace_back(0, 0.0, 0);
      }
    }
    return k;
  };
  // Recurse over detections in score order.
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (pos == order.size()) {
      Key k = key_of();
      if (!have_best || k > best_key) {
        best_key = std::move(k);
        best_assign = assign;
        have_best = true;
      }
      return;
    }
    const std::size_t d = order[pos];
    assign[d].reset();
    self(self, pos + 1);
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g] || m[d][g] < iou_threshold) continue;
      used[g] = true;
      assign[d] = g;
      self(self, pos + 1);
      assign[d].reset();
      used[g] = false;
    }
  };
  rec(rec, 0);
  return OracleMatch{best_assign};
}

// 101-point interpolated AP straight from the definition: for each recall
// level r, the largest precision among points with recall >= r.
inline double brute_force_ap101(const std::vector<std::pair<double, double>>& recall_precision) {
  double sum = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    double best = 0.0;
    for (const auto& [rec, prec] : recall_precision) {
      if (rec >= r) best = std::max(best, prec);
    }
    sum += best;
  }
  return sum / 101.0;
}

}  // namespace detens::oracle
