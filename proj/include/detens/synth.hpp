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

// Seeded synthetic ground truth and simulated detectors.
//
// Randomness comes from a single std::mt19937_64 seeded with
// ScenarioConfig::seed. Its output sequence is fixed by the C++ standard;
// the distribution transforms below are implemented here rather than taken
// from <random> (whose distributions are implementation-defined), so a
// scenario is bit-identical across compilers and platforms.
//
// Draw order, per image in index order:
//   1. object count            uniform_int(min_objects, max_objects)
//   2. per object              class (categorical), width, height, x, y
//   3. per detector, in order:
//        per object            detect? (uniform01); if detected: four corner
//                              offsets in [-jitter, jitter], then confidence
//        false-positive count  poisson(false_positives_per_image)
//        per false positive    class (uniform), width, height, x, y,
//                              confidence

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "detens/error.hpp"
#include "detens/types.hpp"

namespace detens {

struct DetectorProfile {
  std::string model_id;
  std::vector<double> detection_probability;  // per class, catalog order
  double false_positives_per_image = 0.0;
  double jitter = 0.0;  // max absolute corner offset, pixels
  double tp_confidence_mean = 0.7;
  double tp_confidence_spread = 0.2;
  double fp_confidence_mean = 0.3;
  double fp_confidence_spread = 0.2;
};

struct ScenarioClass {
  CategoryId category_id = 0;
  std::string name;
  double frequency = 0.0;  // relative; need not sum to 1
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  std::size_t image_count = 0;
  double image_width = 1024.0;
  double image_height = 1024.0;
  std::vector<ScenarioClass> classes;  // ascending category id
  std::size_t min_objects = 0;
  std::size_t max_objects = 0;
  double min_box_size = 32.0;
  double max_box_size = 96.0;
  std::vector<DetectorProfile> detectors;
};

struct Scenario {
  GroundTruthSet ground_truth;
  std::vector<ModelRun> runs;  // one per detector profile
  ScenarioConfig config;
};

inline void validate(const ScenarioConfig& config) {
  if (config.classes.empty()) throw ConfigError("scenario has no classes");
  double total = 0.0;
  for (const auto& c : config.classes) {
    if (!(c.frequency >= 0.0) || !std::isfinite(c.frequency)) {
      throw ConfigError("class frequencies must be finite and nonnegative");
    }
    total += c.frequency;
  }
  if (!(total > 0.0)) throw ConfigError("class frequencies are all zero");
  if (config.min_objects > config.max_objects) {
    throw ConfigError("min_objects exceeds max_objects");
  }
  if (!(config.image_width > 0.0 && config.image_height > 0.0)) {
    throw ConfigError("image size must be positive");
  }
  if (!(config.min_box_size > 0.0 && config.min_box_size <= config.max_box_size)) {
    throw ConfigError("box size range must satisfy 0 < min <= max");
  }
  if (config.max_box_size > config.image_width || config.max_box_size > config.image_height) {
    throw ConfigError("maximum box size does not fit inside the image");
  }
  for (const auto& d : config.detectors) {
    if (d.model_id.empty()) throw ConfigError("detector profile needs a model id");
    if (d.detection_probability.size() != config.classes.size()) {
      throw ConfigError("detector '" + d.model_id +
                        "' must give one detection probability per class");
    }
    for (double p : d.detection_probability) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ConfigError("detection probabilities must lie in [0, 1]");
      }
    }
    if (!(d.jitter >= 0.0)) throw ConfigError("jitter must be nonnegative");
    if (!(d.false_positives_per_image >= 0.0) || d.false_positives_per_image > 500.0) {
      throw ConfigError("false-positive rate must lie in [0, 500]");
    }
    if (!(d.tp_confidence_spread >= 0.0 && d.fp_confidence_spread >= 0.0)) {
      throw ConfigError("confidence spreads must be nonnegative");
    }
  }
}

// Distribution transforms over mt19937_64 with a fixed definition.
class ScenarioRng {
 public:
  explicit ScenarioRng(std::uint64_t seed) : engine_(seed) {}

  // 53 random bits mapped to [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::size_t uniform_int(std::size_t lo, std::size_t hi) {
    const double span = static_cast<double>(hi - lo + 1);
    const auto k = static_cast<std::size_t>(uniform01() * span);
    return lo + std::min(k, hi - lo);
  }

  std::size_t categorical(const std::vector<double>& cumulative) {
    const double u = uniform01() * cumulative.back();
    for (std::size_t i = 0; i < cumulative.size(); ++i) {
      if (u < cumulative[i]) return i;
    }
    return cumulative.size() - 1;
  }

  // Knuth's multiplication method.
  std::size_t poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    std::size_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::mt19937_64 engine_;
};

namespace detail {

inline double clamp_confidence(ScenarioRng& rng, double mean, double spread) {
  return std::clamp(rng.uniform(mean - spread, mean + spread), 0.0, 1.0);
}

inline BoundingBox random_box(ScenarioRng& rng, const ScenarioConfig& c) {
  const double w = rng.uniform(c.min_box_size, c.max_box_size);
  const double h = rng.uniform(c.min_box_size, c.max_box_size);
  const double x = rng.uniform(0.0, c.image_width - w);
  const double y = rng.uniform(0.0, c.image_height - h);
  return BoundingBox(x, y, x + w, y + h);
}

inline BoundingBox jittered(ScenarioRng& rng, const BoundingBox& b, double jitter,
                            const ScenarioConfig& c) {
  double x0 = b.x_min() + rng.uniform(-jitter, jitter);
  double y0 = b.y_min() + rng.uniform(-jitter, jitter);
  double x1 = b.x_max() + rng.uniform(-jitter, jitter);
  double y1 = b.y_max() + rng.uniform(-jitter, jitter);
  x0 = std::clamp(x0, 0.0, c.image_width);
  x1 = std::clamp(x1, 0.0, c.image_width);
  y0 = std::clamp(y0, 0.0, c.image_height);
  y1 = std::clamp(y1, 0.0, c.image_height);
  if (x0 > x1) std::swap(x0, x1);
  if (y0 > y1) std::swap(y0, y1);
  return BoundingBox(x0, y0, x1, y1);
}

}  // namespace detail

// Image ids are "1".."N" so they serialize as integer COCO ids.
inline Scenario generate(const ScenarioConfig& config) {
  validate(config);
  std::vector<ClassCatalog::Entry> entries;
  for (const auto& c : config.classes) entries.push_back({c.category_id, c.name});
  ClassCatalog catalog(std::move(entries));  // rejects duplicate ids/names

  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& c : config.classes) cumulative.push_back(acc += c.frequency);

  Scenario s{GroundTruthSet(catalog), {}, config};
  for (const auto& d : config.detectors) {
    ModelRun run;
    run.model_id = d.model_id;
    s.runs.push_back(std::move(run));
  }

  ScenarioRng rng(config.seed);
  for (std::size_t i = 0; i < config.image_count; ++i) {
    const ImageId image = std::to_string(i + 1);
    s.ground_truth.add_image(image);
    const std::size_t n = rng.uniform_int(config.min_objects, config.max_objects);
    std::vector<std::size_t> object_class;
    std::vector<BoundingBox> object_box;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t cls = rng.categorical(cumulative);
      const BoundingBox box = detail::random_box(rng, config);
      object_class.push_back(cls);
      object_box.push_back(box);
      s.ground_truth.add(GroundTruthBox{image, config.classes[cls].category_id, box});
    }
    for (std::size_t d = 0; d < config.detectors.size(); ++d) {
      const DetectorProfile& p = config.detectors[d];
      auto& out = s.runs[d].detections;
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t cls = object_class[k];
        if (!(rng.uniform01() < p.detection_probability[cls])) continue;
        const BoundingBox box = detail::jittered(rng, object_box[k], p.jitter, config);
        const double conf =
            detail::clamp_confidence(rng, p.tp_confidence_mean, p.tp_confidence_spread);
        out.push_back(Detection{image, config.classes[cls].category_id, box, conf, p.model_id});
      }
      const std::size_t fps = rng.poisson(p.false_positives_per_image);
      for (std::size_t f = 0; f < fps; ++f) {
        const std::size_t cls = rng.uniform_int(0, config.classes.size() - 1);
        const BoundingBox box = detail::random_box(rng, config);
        const double conf =
            detail::clamp_confidence(rng, p.fp_confidence_mean, p.fp_confidence_spread);
        out.push_back(Detection{image, config.classes[cls].category_id, box, conf, p.model_id});
      }
    }
  }
  return s;
}

// Lower bound on IoU between a box of size w x h and any copy whose corners
// moved by at most `jitter` each (clamping into the image only shrinks the
// offsets).
inline double jitter_iou_bound(double w, double h, double jitter) {
  const double iw = std::max(0.0, w - 2.0 * jitter);
  const double ih = std::max(0.0, h - 2.0 * jitter);
  return iw * ih / ((w + 2.0 * jitter) * (h + 2.0 * jitter));
}

// Eight cytology classes at the reference dataset's instance proportions,
// 1024x1024 images and three detectors with complementary per-class recall:
// one strong on the non-lesion majority classes, one balanced, one strong
// on the rare lesion classes.
inline ScenarioConfig riva_profile(std::uint64_t seed = 42) {
  ScenarioConfig c;
  c.seed = seed;
  c.image_count = 200;
  c.image_width = 1024.0;
  c.image_height = 1024.0;
  c.classes = {
      {1, "NILM", 9457.0},  {2, "INFL", 8190.0}, {3, "ENDO", 1270.0},
      {4, "ASCUS", 356.0},  {5, "LSIL", 3048.0}, {6, "ASCH", 416.0},
      {7, "HSIL", 1835.0},  {8, "SCC", 1586.0},
  };
  c.min_objects = 10;
  c.max_objects = 40;
  c.min_box_size = 40.0;
  c.max_box_size = 120.0;

  //                      NILM  INFL  ENDO  ASCUS LSIL  ASCH  HSIL  SCC
  DetectorProfile majority{"loss_reweighting",
                           {0.92, 0.90, 0.80, 0.30, 0.55, 0.30, 0.45, 0.50},
                           4.0, 7.0, 0.70, 0.25, 0.25, 0.20};
  DetectorProfile balanced{"transfer_learning",
                           {0.75, 0.72, 0.70, 0.55, 0.65, 0.55, 0.62, 0.62},
                           3.0, 6.0, 0.65, 0.25, 0.25, 0.20};
  DetectorProfile minority{"weighted_sampler",
                           {0.55, 0.55, 0.60, 0.80, 0.75, 0.80, 0.82, 0.85},
                           5.0, 8.0, 0.65, 0.30, 0.30, 0.20};
  c.detectors = {majority, balanced, minority};
  return c;
}

}  // namespace detens
