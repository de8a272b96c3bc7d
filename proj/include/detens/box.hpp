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
#include <cmath>
#include <sstream>

#include "detens/error.hpp"

namespace detens {

// Axis-aligned rectangle in continuous image coordinates (origin top-left),
// stored as a corner pair. Zero-area boxes are legal; negative extents and
// non-finite coordinates are rejected at construction, so every live
// BoundingBox is valid.
class BoundingBox {
 public:
  BoundingBox() = default;

  BoundingBox(double x_min, double y_min, double x_max, double y_max)
      : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
    if (!std::isfinite(x_min) || !std::isfinite(y_min) ||
        !std::isfinite(x_max) || !std::isfinite(y_max)) {
      throw ValidationError("bounding box has a non-finite coordinate");
    }
    if (x_min > x_max || y_min > y_max) {
      std::ostringstream os;
      os << "bounding box has negative extent: [" << x_min << ", " << y_min
         << ", " << x_max << ", " << y_max << "]";
      throw ValidationError(os.str());
    }
  }

  // COCO (x, y, width, height) convention.
  static BoundingBox from_xywh(double x, double y, double w, double h) {
    if (w < 0 || h < 0) {
      std::ostringstream os;
      os << "bounding box has negative width or height: w=" << w
         << " h=" << h;
      throw ValidationError(os.str());
    }
    return BoundingBox(x, y, x + w, y + h);
  }

  double x_min() const { return x_min_; }
  double y_min() const { return y_min_; }
  double x_max() const { return x_max_; }
  double y_max() const { return y_max_; }
  double width() const { return x_max_ - x_min_; }
  double height() const { return y_max_ - y_min_; }

  bool operator==(const BoundingBox&) const = default;

 private:
  double x_min_ = 0.0;
  double y_min_ = 0.0;
  double x_max_ = 0.0;
  double y_max_ = 0.0;
};

inline double box_area(const BoundingBox& a) { return a.width() * a.height(); }

// Intersection over union on continuous coordinates. Returns 0 when the
// union is empty (two degenerate boxes).
inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double ih = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = box_area(a) + box_area(b) - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace detens
