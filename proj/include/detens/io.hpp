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

// Interchange formats.
//
//   ground truth   COCO annotation JSON {images, annotations, categories}
//   detections     COCO results JSON [{image_id, category_id, bbox, score}]
//                  or CSV image_id,class_name,x,y,w,h,score
//   weight table   {scheme, total, classes:[...], images:[...]?}
//   metrics        JSON summary + one CSV (confidence,precision,recall) per
//                  class
//
// Boxes are (x, y, w, h) on the wire and corner pairs in memory. Image ids
// that are canonical decimal integers are written as JSON numbers, every
// other id as a string.

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "detens/error.hpp"
#include "detens/metrics.hpp"
#include "detens/synth.hpp"
#include "detens/types.hpp"
#include "detens/weights.hpp"

namespace detens {

using json = nlohmann::ordered_json;

struct ParseDiagnostics {
  std::size_t clamped_scores = 0;
  std::size_t degenerate_boxes = 0;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text,
                                                       std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, col] = line_column(text, byte);
    throw ParseError(std::string("malformed ") + what + " at line " + std::to_string(line) +
                         ", column " + std::to_string(col) + ": " + e.what(),
                     byte, line, col);
  }
}

inline bool is_canonical_integer(const std::string& s) {
  if (s.empty() || s.size() > 18) return false;
  std::size_t i = s[0] == '-' ? 1 : 0;
  if (i == s.size()) return false;
  if (s[i] == '0' && s.size() > i + 1) return false;
  if (s == "-0") return false;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

inline json image_id_to_json(const ImageId& id) {
  if (is_canonical_integer(id)) return json(std::stoll(id));
  return json(id);
}

inline ImageId image_id_from_json(const json& v) {
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_string()) return v.get<std::string>();
  throw std::invalid_argument("image id must be an integer or a string");
}

inline double number(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw std::invalid_argument(std::string("missing numeric field '") + key + "'");
  }
  return it->get<double>();
}

inline const json& field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return *it;
}

inline std::int64_t category_of(const json& obj) {
  const json& v = field(obj, "category_id");
  if (!v.is_number_integer()) throw std::invalid_argument("category_id must be an integer");
  return v.get<std::int64_t>();
}

inline std::array<double, 4> bbox_of(const json& obj) {
  const json& v = field(obj, "bbox");
  if (!v.is_array() || v.size() != 4) {
    throw std::invalid_argument("bbox must be an array of four numbers");
  }
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number()) throw std::invalid_argument("bbox must be an array of four numbers");
    out[i] = v[i].get<double>();
    if (!std::isfinite(out[i])) throw std::invalid_argument("bbox coordinates must be finite");
  }
  return out;
}

inline json bbox_to_json(const BoundingBox& b) {
  return json::array({b.x_min(), b.y_min(), b.width(), b.height()});
}

// Rounds to 12 significant digits.
inline double round12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

inline const json& array_member(const json& doc, const char* key, const char* what) {
  const auto it = doc.find(key);
  if (it == doc.end() || !it->is_array()) {
    throw ParseError(std::string(what) + " lacks a '" + key + "' array", 0, 1, 1);
  }
  return *it;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ground truth

inline GroundTruthSet parse_ground_truth(std::string_view text,
                                         ParseDiagnostics* diag = nullptr) {
  const json doc = detail::parse_json(text, "ground-truth document");
  if (!doc.is_object()) throw ParseError("ground-truth document must be a JSON object", 0, 1, 1);
  const json& images = detail::array_member(doc, "images", "ground-truth document");
  const json& annotations = detail::array_member(doc, "annotations", "ground-truth document");
  const json& categories = detail::array_member(doc, "categories", "ground-truth document");

  std::vector<ClassCatalog::Entry> entries;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    try {
      const json& c = categories[i];
      const json& id = detail::field(c, "id");
      const json& name = detail::field(c, "name");
      if (!id.is_number_integer() || !name.is_string()) {
        throw std::invalid_argument("category needs an integer 'id' and a string 'name'");
      }
      entries.push_back({id.get<std::int64_t>(), name.get<std::string>()});
    } catch (const std::invalid_argument& e) {
      throw ParseError("category record " + std::to_string(i) + ": " + e.what(), i);
    } catch (const json::exception& e) {
      throw ParseError("category record " + std::to_string(i) + ": " + e.what(), i);
    }
  }
  GroundTruthSet gts{ClassCatalog(std::move(entries))};

  for (std::size_t i = 0; i < images.size(); ++i) {
    try {
      gts.add_image(detail::image_id_from_json(detail::field(images[i], "id")));
    } catch (const std::invalid_argument& e) {
      throw ParseError("image record " + std::to_string(i) + ": " + e.what(), i);
    } catch (const json::exception& e) {
      throw ParseError("image record " + std::to_string(i) + ": " + e.what(), i);
    }
  }

  for (std::size_t i = 0; i < annotations.size(); ++i) {
    ImageId image;
    std::int64_t category = 0;
    std::array<double, 4> bb{};
    try {
      const json& a = annotations[i];
      image = detail::image_id_from_json(detail::field(a, "image_id"));
      category = detail::category_of(a);
      bb = detail::bbox_of(a);
    } catch (const std::invalid_argument& e) {
      throw ParseError("annotation record " + std::to_string(i) + ": " + e.what(), i);
    } catch (const json::exception& e) {
      throw ParseError("annotation record " + std::to_string(i) + ": " + e.what(), i);
    }
    if (!gts.has_image(image)) {
      throw ValidationError("annotation " + std::to_string(i) + " references unknown image '" +
                            image + "'");
    }
    if (!gts.catalog().contains(category)) {
      throw ValidationError("annotation " + std::to_string(i) +
                            " references unknown category " + std::to_string(category));
    }
    if (bb[2] < 0 || bb[3] < 0) {
      throw ValidationError("annotation " + std::to_string(i) +
                            " has negative width or height");
    }
    if ((bb[2] == 0 || bb[3] == 0) && diag) ++diag->degenerate_boxes;
    gts.add(GroundTruthBox{image, category, BoundingBox::from_xywh(bb[0], bb[1], bb[2], bb[3])});
  }
  return gts;
}

inline std::string emit_ground_truth(const GroundTruthSet& gts) {
  json doc;
  json images = json::array();
  json annotations = json::array();
  std::int64_t next_id = 1;
  for (const auto& [id, boxes] : gts.images()) {
    images.push_back({{"id", detail::image_id_to_json(id)}});
    for (const auto& b : boxes) {
      annotations.push_back({{"id", next_id++},
                             {"image_id", detail::image_id_to_json(id)},
                             {"category_id", b.category_id},
                             {"bbox", detail::bbox_to_json(b.box)},
                             {"area", box_area(b.box)},
                             {"iscrowd", 0}});
    }
  }
  json categories = json::array();
  for (const auto& c : gts.catalog().classes()) {
    categories.push_back({{"id", c.category_id}, {"name", c.name}});
  }
  doc["images"] = std::move(images);
  doc["annotations"] = std::move(annotations);
  doc["categories"] = std::move(categories);
  return doc.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// Detections

// Scores outside [0, 1] are clamped and counted in `diag`. With a catalog,
// unknown categories are a ValidationError.
inline ModelRun parse_detections(std::string_view text, const std::string& model_id,
                                 const ClassCatalog* catalog = nullptr,
                                 ParseDiagnostics* diag = nullptr) {
  const json doc = detail::parse_json(text, "detection document");
  if (!doc.is_array()) throw ParseError("detection document must be a JSON array", 0, 1, 1);
  ModelRun run;
  run.model_id = model_id;
  run.detections.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    Detection d;
    std::array<double, 4> bb{};
    try {
      const json& r = doc[i];
      if (!r.is_object()) throw std::invalid_argument("record must be an object");
      d.image_id = detail::image_id_from_json(detail::field(r, "image_id"));
      d.category_id = detail::category_of(r);
      bb = detail::bbox_of(r);
      d.score = detail::number(r, "score");
      if (!std::isfinite(d.score)) throw std::invalid_argument("score must be finite");
      if (bb[2] < 0 || bb[3] < 0) throw std::invalid_argument("negative width or height");
    } catch (const std::invalid_argument& e) {
      throw ParseError("detection record " + std::to_string(i) + ": " + e.what(), i);
    } catch (const json::exception& e) {
      throw ParseError("detection record " + std::to_string(i) + ": " + e.what(), i);
    }
    if (catalog && !catalog->contains(d.category_id)) {
      throw ValidationError("detection record " + std::to_string(i) +
                            " references unknown category " + std::to_string(d.category_id));
    }
    if (d.score < 0.0 || d.score > 1.0) {
      d.score = std::clamp(d.score, 0.0, 1.0);
      if (diag) ++diag->clamped_scores;
    }
    if ((bb[2] == 0 || bb[3] == 0) && diag) ++diag->degenerate_boxes;
    d.box = BoundingBox::from_xywh(bb[0], bb[1], bb[2], bb[3]);
    d.model_id = model_id;
    run.detections.push_back(std::move(d));
  }
  return run;
}

inline std::string emit_detections(const ModelRun& run) {
  if (run.detections.empty()) return "[]\n";
  std::string out = "[\n";
  for (std::size_t i = 0; i < run.detections.size(); ++i) {
    const Detection& d = run.detections[i];
    json r;
    r["image_id"] = detail::image_id_to_json(d.image_id);
    r["category_id"] = d.category_id;
    r["bbox"] = detail::bbox_to_json(d.box);
    r["score"] = d.score;
    out += "  " + r.dump();
    out += i + 1 < run.detections.size() ? ",\n" : "\n";
  }
  out += "]\n";
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    std::string_view f = line.substr(start, comma == std::string_view::npos
                                                ? std::string_view::npos
                                                : comma - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) {
      f.remove_suffix(1);
    }
    out.emplace_back(f);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw std::invalid_argument("'" + s + "' is not a finite number");
  }
  return v;
}

template <typename Fn>
void for_each_csv_record(std::string_view text, Fn&& fn) {
  std::size_t pos = 0, line_no = 0, record = 0;
  bool first = true;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    ++line_no;
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (nl == text.size()) break;
      continue;
    }
    auto fields = split_csv_line(line);
    if (first && !fields.empty() && fields[0] == "image_id") {
      first = false;
      continue;
    }
    first = false;
    fn(fields, record++, line_no);
    if (nl == text.size()) break;
  }
}

}  // namespace detail

// Class names used by a CSV detection document.
inline std::set<std::string> csv_class_names(std::string_view text) {
  std::set<std::string> names;
  detail::for_each_csv_record(text, [&](const std::vector<std::string>& f, std::size_t record,
                                        std::size_t line) {
    if (f.size() != 7) {
      throw ParseError("CSV record " + std::to_string(record) + " (line " +
                           std::to_string(line) + ") needs 7 fields",
                       record);
    }
    names.insert(f[1]);
  });
  return names;
}

// CSV fallback: image_id,class_name,x,y,w,h,score, optional header row.
// Class names resolve through `catalog`.
inline ModelRun parse_detections_csv(std::string_view text, const std::string& model_id,
                                     const ClassCatalog& catalog,
                                     ParseDiagnostics* diag = nullptr) {
  ModelRun run;
  run.model_id = model_id;
  detail::for_each_csv_record(text, [&](const std::vector<std::string>& f, std::size_t record,
                                        std::size_t line) {
    const std::string where =
        "CSV record " + std::to_string(record) + " (line " + std::to_string(line) + ")";
    if (f.size() != 7) throw ParseError(where + " needs 7 fields", record);
    Detection d;
    double x, y, w, h;
    try {
      if (f[0].empty()) throw std::invalid_argument("empty image id");
      x = detail::parse_double(f[2]);
      y = detail::parse_double(f[3]);
      w = detail::parse_double(f[4]);
      h = detail::parse_double(f[5]);
      d.score = detail::parse_double(f[6]);
      if (w < 0 || h < 0) throw std::invalid_argument("negative width or height");
    } catch (const std::invalid_argument& e) {
      throw ParseError(where + ": " + e.what(), record);
    }
    const auto idx = catalog.index_of_name(f[1]);
    if (!idx) throw ValidationError(where + " references unknown class '" + f[1] + "'");
    d.image_id = f[0];
    d.category_id = catalog[*idx].category_id;
    if (d.score < 0.0 || d.score > 1.0) {
      d.score = std::clamp(d.score, 0.0, 1.0);
      if (diag) ++diag->clamped_scores;
    }
    if ((w == 0 || h == 0) && diag) ++diag->degenerate_boxes;
    d.box = BoundingBox::from_xywh(x, y, w, h);
    d.model_id = model_id;
    run.detections.push_back(std::move(d));
  });
  return run;
}

// ---------------------------------------------------------------------------
// Weight tables

inline std::string emit_weight_table(const ClassWeightTable& table) {
  json doc;
  doc["scheme"] = scheme_name(table.scheme);
  if (table.scheme == WeightScheme::kLossLog) doc["log_base"] = table.log_base;
  doc["total"] = table.total;
  json classes = json::array();
  for (const auto& c : table.classes) {
    classes.push_back({{"name", c.name},
                       {"category_id", c.category_id},
                       {"count", c.count},
                       {"frequency", detail::round12(c.frequency)},
                       {"weight", detail::round12(c.weight)}});
  }
  doc["classes"] = std::move(classes);
  if (table.images && !table.images->images.empty()) {
    json images = json::array();
    for (const auto& img : table.images->images) {
      images.push_back({{"image_id", detail::image_id_to_json(img.image_id)},
                        {"weight", detail::round12(img.weight)},
                        {"probability", detail::round12(img.probability)}});
    }
    doc["normalization"] = detail::round12(table.images->normalization);
    doc["images"] = std::move(images);
  }
  if (!table.warnings.empty()) doc["warnings"] = table.warnings;
  return doc.dump(2) + "\n";
}

inline ClassWeightTable parse_weight_table(std::string_view text) {
  const json doc = detail::parse_json(text, "weight table");
  ClassWeightTable table;
  try {
    const auto scheme = parse_scheme(detail::field(doc, "scheme").get<std::string>());
    if (!scheme) throw std::invalid_argument("unknown weight scheme");
    table.scheme = *scheme;
    if (doc.contains("log_base")) table.log_base = detail::number(doc, "log_base");
    if (doc.contains("total")) table.total = detail::field(doc, "total").get<std::uint64_t>();
    for (const auto& c : detail::array_member(doc, "classes", "weight table")) {
      ClassWeight w;
      w.name = detail::field(c, "name").get<std::string>();
      if (c.contains("category_id")) w.category_id = c["category_id"].get<std::int64_t>();
      w.count = detail::field(c, "count").get<std::uint64_t>();
      if (c.contains("frequency")) w.frequency = detail::number(c, "frequency");
      w.weight = detail::number(c, "weight");
      table.classes.push_back(std::move(w));
    }
    if (doc.contains("images")) {
      ImageWeightTable images;
      if (doc.contains("normalization")) images.normalization = detail::number(doc, "normalization");
      for (const auto& img : detail::array_member(doc, "images", "weight table")) {
        images.images.push_back(ImageWeight{
            detail::image_id_from_json(detail::field(img, "image_id")),
            detail::number(img, "weight"),
            img.contains("probability") ? detail::number(img, "probability") : 0.0});
      }
      table.images = std::move(images);
    }
    if (doc.contains("warnings")) table.warnings = doc["warnings"].get<std::vector<std::string>>();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("weight table: ") + e.what(), 0, 1, 1);
  } catch (const json::exception& e) {
    throw ParseError(std::string("weight table: ") + e.what(), 0, 1, 1);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Metrics reports

inline const char* ap_method_name(ApMethod m) {
  return m == ApMethod::kCoco101 ? "coco101" : "trapezoid";
}

// Collapses a curve to one row per distinct confidence (the state after the
// last detection at that confidence), in descending confidence.
inline std::vector<PrPoint> pr_table_rows(const PrCurve& curve) {
  std::vector<PrPoint> rows;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    if (i + 1 < curve.points.size() &&
        curve.points[i + 1].confidence == curve.points[i].confidence) {
      continue;
    }
    rows.push_back(curve.points[i]);
  }
  return rows;
}

inline std::string emit_pr_table(const PrCurve& curve) {
  std::string out = "confidence,precision,recall\n";
  char buf[128];
  for (const auto& p : pr_table_rows(curve)) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.confidence, p.precision,
                  p.recall);
    out += buf;
  }
  return out;
}

inline std::vector<PrPoint> parse_pr_table(std::string_view text) {
  std::vector<PrPoint> rows;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty() || (line_no == 1 && line.starts_with("confidence"))) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 3) {
      throw ParseError("PR table line " + std::to_string(line_no) + " needs 3 fields", 0,
                       line_no, 1);
    }
    try {
      rows.push_back(PrPoint{detail::parse_double(f[0]), detail::parse_double(f[1]),
                             detail::parse_double(f[2])});
    } catch (const std::invalid_argument& e) {
      throw ParseError("PR table line " + std::to_string(line_no) + ": " + e.what(), 0,
                       line_no, 1);
    }
  }
  return rows;
}

inline std::string pr_table_filename(const ClassMetrics& m) {
  std::string name;
  for (char ch : m.name) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '-' || ch == '_';
    name += ok ? ch : '_';
  }
  return "pr_" + std::to_string(m.category_id) + "_" + name + ".csv";
}

struct ReportDocuments {
  std::string summary;                                       // JSON
  std::vector<std::pair<std::string, std::string>> pr_tables;  // filename, CSV
};

inline ReportDocuments emit_metrics_report(const MetricsReport& report) {
  ReportDocuments docs;
  json doc;
  doc["map_50_95"] = report.map_50_95;
  doc["mean_ap_pr_iou"] = report.mean_ap_pr_iou;
  doc["pooled_ap_pr_iou"] = report.pooled_ap_pr_iou;
  doc["pr_iou"] = report.pr_iou;
  doc["min_confidence"] = report.min_confidence;
  doc["ap_method"] = ap_method_name(report.ap_method);
  doc["iou_thresholds"] = report.iou_thresholds;
  json classes = json::array();
  for (const auto& m : report.classes) {
    const std::string file = pr_table_filename(m);
    classes.push_back({{"category_id", m.category_id},
                       {"name", m.name},
                       {"num_gt", m.num_gt},
                       {"num_detections", m.num_detections},
                       {"ap", m.ap},
                       {"ap_50_95", m.ap_50_95},
                       {"ap_pr_iou", m.ap_pr_iou},
                       {"pr_table", file}});
    docs.pr_tables.emplace_back(file, emit_pr_table(m.pr_curve));
  }
  doc["classes"] = std::move(classes);
  json f1;
  f1["threshold"] = report.f1.threshold;
  f1["f1"] = report.f1.f1;
  f1["precision"] = report.f1.precision;
  f1["recall"] = report.f1.recall;
  json f1_classes = json::array();
  for (const auto& c : report.f1.classes) {
    f1_classes.push_back({{"category_id", c.category_id},
                          {"name", c.name},
                          {"true_positives", c.true_positives},
                          {"false_positives", c.false_positives},
                          {"num_gt", c.num_gt},
                          {"precision", c.precision},
                          {"recall", c.recall}});
  }
  f1["classes"] = std::move(f1_classes);
  doc["f1_optimal"] = std::move(f1);
  doc["ignored_classes"] = report.ignored_classes;
  doc["ignored_detections"] = report.ignored_detections;
  doc["warnings"] = report.warnings;
  docs.summary = doc.dump(2) + "\n";
  return docs;
}

// Reads a summary back. PR curves are not part of the summary; their rows
// come from parse_pr_table.
inline MetricsReport parse_metrics_report(std::string_view text) {
  const json doc = detail::parse_json(text, "metrics report");
  MetricsReport r;
  try {
    r.map_50_95 = detail::number(doc, "map_50_95");
    r.mean_ap_pr_iou = detail::number(doc, "mean_ap_pr_iou");
    r.pooled_ap_pr_iou = detail::number(doc, "pooled_ap_pr_iou");
    r.pr_iou = detail::number(doc, "pr_iou");
    r.min_confidence = detail::number(doc, "min_confidence");
    r.ap_method = detail::field(doc, "ap_method").get<std::string>() == "trapezoid"
                      ? ApMethod::kTrapezoid
                      : ApMethod::kCoco101;
    r.iou_thresholds = detail::field(doc, "iou_thresholds").get<std::vector<double>>();
    for (const auto& c : detail::array_member(doc, "classes", "metrics report")) {
      ClassMetrics m;
      m.category_id = c.at("category_id").get<std::int64_t>();
      m.name = c.at("name").get<std::string>();
      m.num_gt = c.at("num_gt").get<std::size_t>();
      m.num_detections = c.at("num_detections").get<std::size_t>();
      m.ap = c.at("ap").get<std::vector<double>>();
      m.ap_50_95 = c.at("ap_50_95").get<double>();
      m.ap_pr_iou = c.at("ap_pr_iou").get<double>();
      m.pr_curve.category_id = m.category_id;
      m.pr_curve.iou_threshold = r.pr_iou;
      m.pr_curve.num_gt = m.num_gt;
      r.classes.push_back(std::move(m));
    }
    const json& f1 = detail::field(doc, "f1_optimal");
    r.f1.threshold = f1.at("threshold").get<double>();
    r.f1.f1 = f1.at("f1").get<double>();
    r.f1.precision = f1.at("precision").get<double>();
    r.f1.recall = f1.at("recall").get<double>();
    for (const auto& c : f1.at("classes")) {
      r.f1.classes.push_back(ClassOperatingPoint{
          c.at("category_id").get<std::int64_t>(), c.at("name").get<std::string>(),
          c.at("true_positives").get<std::size_t>(), c.at("false_positives").get<std::size_t>(),
          c.at("num_gt").get<std::size_t>(), c.at("precision").get<double>(),
          c.at("recall").get<double>()});
    }
    r.ignored_classes = doc.at("ignored_classes").get<std::vector<std::string>>();
    r.ignored_detections = doc.at("ignored_detections").get<std::size_t>();
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("metrics report: ") + e.what(), 0, 1, 1);
  } catch (const json::exception& e) {
    throw ParseError(std::string("metrics report: ") + e.what(), 0, 1, 1);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Scenario configs

inline json scenario_config_to_json(const ScenarioConfig& c) {
  json doc;
  doc["seed"] = c.seed;
  doc["image_count"] = c.image_count;
  doc["image_width"] = c.image_width;
  doc["image_height"] = c.image_height;
  doc["min_objects"] = c.min_objects;
  doc["max_objects"] = c.max_objects;
  doc["min_box_size"] = c.min_box_size;
  doc["max_box_size"] = c.max_box_size;
  json classes = json::array();
  for (const auto& k : c.classes) {
    classes.push_back({{"category_id", k.category_id}, {"name", k.name}, {"frequency", k.frequency}});
  }
  doc["classes"] = std::move(classes);
  json detectors = json::array();
  for (const auto& d : c.detectors) {
    detectors.push_back({{"model_id", d.model_id},
                         {"detection_probability", d.detection_probability},
                         {"false_positives_per_image", d.false_positives_per_image},
                         {"jitter", d.jitter},
                         {"tp_confidence_mean", d.tp_confidence_mean},
                         {"tp_confidence_spread", d.tp_confidence_spread},
                         {"fp_confidence_mean", d.fp_confidence_mean},
                         {"fp_confidence_spread", d.fp_confidence_spread}});
  }
  doc["detectors"] = std::move(detectors);
  return doc;
}

inline ScenarioConfig scenario_config_from_json(std::string_view text) {
  const json doc = detail::parse_json(text, "scenario config");
  ScenarioConfig c;
  try {
    c.seed = doc.value("seed", std::uint64_t{0});
    c.image_count = doc.value("image_count", std::size_t{0});
    c.image_width = doc.value("image_width", c.image_width);
    c.image_height = doc.value("image_height", c.image_height);
    c.min_objects = doc.value("min_objects", c.min_objects);
    c.max_objects = doc.value("max_objects", c.max_objects);
    c.min_box_size = doc.value("min_box_size", c.min_box_size);
    c.max_box_size = doc.value("max_box_size", c.max_box_size);
    for (const auto& k : detail::array_member(doc, "classes", "scenario config")) {
      c.classes.push_back(ScenarioClass{k.at("category_id").get<std::int64_t>(),
                                        k.at("name").get<std::string>(),
                                        k.at("frequency").get<double>()});
    }
    if (doc.contains("detectors")) {
      for (const auto& d : doc.at("detectors")) {
        DetectorProfile p;
        p.model_id = d.at("model_id").get<std::string>();
        p.detection_probability = d.at("detection_probability").get<std::vector<double>>();
        p.false_positives_per_image = d.value("false_positives_per_image", 0.0);
        p.jitter = d.value("jitter", 0.0);
        p.tp_confidence_mean = d.value("tp_confidence_mean", p.tp_confidence_mean);
        p.tp_confidence_spread = d.value("tp_confidence_spread", p.tp_confidence_spread);
        p.fp_confidence_mean = d.value("fp_confidence_mean", p.fp_confidence_mean);
        p.fp_confidence_spread = d.value("fp_confidence_spread", p.fp_confidence_spread);
        c.detectors.push_back(std::move(p));
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario config: ") + e.what(), 0, 1, 1);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace detens
