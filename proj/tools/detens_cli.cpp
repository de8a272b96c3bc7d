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

// detens: fuse, evaluate and reweight object-detection results.
//
// Exit codes: 0 success, 1 data/validation/I-O error, 2 usage error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "detens/detens.hpp"

namespace fs = std::filesystem;
using detens::json;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// JSON config files. Top-level keys set global options; an object keyed by
// a subcommand name sets that subcommand's options, e.g.
//   {"fuse": {"iou": 0.7, "min_conf": 0.001, "weights": [0.108, 0.106, 0.114]}}
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return "{}";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json doc;
    try {
      doc = json::parse(input);
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    flatten(doc, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void flatten(const json& obj, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : obj.items()) {
      std::string name = key;
      std::replace(name.begin(), name.end(), '_', '-');
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(name);
        flatten(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = name;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

const auto kIouRange = CLI::Validator(
    [](std::string& s) -> std::string {
      double v = 0;
      if (!CLI::detail::lexical_cast(s, v) || !(v > 0.0 && v <= 1.0)) {
        return "IoU must lie in (0, 1], got " + s;
      }
      return {};
    },
    "(0,1]");

const auto kConfidenceRange = CLI::Validator(
    [](std::string& s) -> std::string {
      double v = 0;
      if (!CLI::detail::lexical_cast(s, v) || !(v >= 0.0 && v < 1.0)) {
        return "confidence floor must lie in [0, 1), got " + s;
      }
      return {};
    },
    "[0,1)");

bool is_csv(const std::string& path) {
  auto ext = fs::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".csv";
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw detens::Error("cannot create output directory '" + dir + "'");
  }
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

void report_diagnostics(const std::string& path, const detens::ParseDiagnostics& d) {
  if (d.clamped_scores > 0) {
    warn(path + ": " + std::to_string(d.clamped_scores) + " score(s) clamped into [0, 1]");
  }
  if (d.degenerate_boxes > 0) {
    warn(path + ": " + std::to_string(d.degenerate_boxes) + " zero-area box(es)");
  }
}

detens::GroundTruthSet load_ground_truth(const std::string& path) {
  detens::ParseDiagnostics diag;
  auto gts = detens::parse_ground_truth(detens::read_file(path), &diag);
  report_diagnostics(path, diag);
  return gts;
}

detens::ModelRun load_detections(const std::string& path, const std::string& model_id,
                                 const detens::ClassCatalog* catalog) {
  detens::ParseDiagnostics diag;
  const std::string text = detens::read_file(path);
  detens::ModelRun run;
  if (is_csv(path)) {
    if (catalog == nullptr) throw detens::ConfigError("CSV detections need a class catalog");
    run = detens::parse_detections_csv(text, model_id, *catalog, &diag);
  } else {
    run = detens::parse_detections(text, model_id, catalog, &diag);
  }
  report_diagnostics(path, diag);
  return run;
}

// ---------------------------------------------------------------------------
// fuse

struct FuseOptions {
  std::vector<std::string> detections;
  std::vector<double> weights;
  std::string gt;
  std::string out;
  std::string summary;
  double iou = 0.7;
  double min_conf = 0.001;
  bool no_normalize = false;
  bool floor_raw = false;
  unsigned threads = 1;
};

int run_fuse(const FuseOptions& o) {
  if (!o.weights.empty() && o.weights.size() != o.detections.size()) {
    throw UsageError("--weights lists " + std::to_string(o.weights.size()) +
                     " values for " + std::to_string(o.detections.size()) +
                     " detection files");
  }
  for (double w : o.weights) {
    if (!(w >= 0.0)) throw UsageError("--weights must be nonnegative");
  }
  if (!o.weights.empty() &&
      std::none_of(o.weights.begin(), o.weights.end(), [](double w) { return w > 0; })) {
    throw UsageError("at least one --weights value must be positive");
  }

  std::optional<detens::ClassCatalog> catalog;
  if (!o.gt.empty()) {
    catalog = load_ground_truth(o.gt).catalog();
  } else if (std::any_of(o.detections.begin(), o.detections.end(), is_csv)) {
    // CSV inputs without ground truth: ids 1..K over the sorted union of names.
    std::set<std::string> names;
    for (const auto& p : o.detections) {
      if (is_csv(p)) names.merge(detens::csv_class_names(detens::read_file(p)));
    }
    std::vector<detens::ClassCatalog::Entry> entries;
    detens::CategoryId next = 1;
    for (const auto& n : names) entries.push_back({next++, n});
    catalog = detens::ClassCatalog(std::move(entries));
  }

  std::vector<detens::ModelRun> runs;
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < o.detections.size(); ++i) {
    std::string id = fs::path(o.detections[i]).stem().string();
    if (seen[id]++ > 0) id += "#" + std::to_string(i);
    runs.push_back(load_detections(o.detections[i], id, catalog ? &*catalog : nullptr));
  }

  detens::FusionConfig config;
  config.iou_fuse_threshold = o.iou;
  config.min_confidence = o.min_conf;
  config.model_weights =
      o.weights.empty() ? std::vector<double>(runs.size(), 1.0) : o.weights;
  config.normalize_weights = !o.no_normalize;
  config.floor_on_weighted = !o.floor_raw;
  for (std::size_t i = 0; i < runs.size(); ++i) runs[i].ensemble_weight = config.model_weights[i];

  const detens::ModelRun fused = detens::fuse_dataset(runs, config, o.threads);
  detens::write_file(o.out, detens::emit_detections(fused));

  std::map<detens::CategoryId, std::pair<std::size_t, std::size_t>> per_class;
  std::size_t total_in = 0;
  for (const auto& r : runs) {
    for (const auto& d : r.detections) ++per_class[d.category_id].first;
    total_in += r.detections.size();
  }
  for (const auto& d : fused.detections) ++per_class[d.category_id].second;

  json summary;
  summary["iou_fuse_threshold"] = config.iou_fuse_threshold;
  summary["min_confidence"] = config.min_confidence;
  summary["normalize_weights"] = config.normalize_weights;
  summary["floor_on_weighted"] = config.floor_on_weighted;
  const auto effective = detens::effective_weights(config);
  json models = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    models.push_back({{"model_id", runs[i].model_id},
                      {"path", o.detections[i]},
                      {"weight", config.model_weights[i]},
                      {"effective_weight", effective[i]},
                      {"detections", runs[i].detections.size()}});
  }
  summary["models"] = std::move(models);
  json classes = json::array();
  for (const auto& [cat, counts] : per_class) {
    json row{{"category_id", cat}};
    if (catalog) {
      if (auto idx = catalog->index_of(cat)) row["name"] = (*catalog)[*idx].name;
    }
    row["input_detections"] = counts.first;
    row["fused_detections"] = counts.second;
    classes.push_back(std::move(row));
  }
  summary["classes"] = std::move(classes);
  summary["input_detections"] = total_in;
  summary["fused_detections"] = fused.detections.size();
  detens::write_file(o.summary.empty() ? o.out + ".summary.json" : o.summary,
                     summary.dump(2) + "\n");

  std::cout << "input_detections: " << total_in << "\n"
            << "fused_detections: " << fused.detections.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval / pr

struct EvalOptions {
  std::string gt;
  std::string det;
  std::string out_dir = ".";
  double min_conf = 0.001;
  std::vector<double> iou_thresholds;
  double pr_iou = 0.5;
  std::string ap_method = "coco101";
  std::size_t max_dets = 0;
  unsigned threads = 1;
};

detens::MetricsReport evaluate(const EvalOptions& o, const detens::EvalConfig& config) {
  const auto gts = load_ground_truth(o.gt);
  const auto run = load_detections(o.det, fs::path(o.det).stem().string(), &gts.catalog());
  auto report = detens::map_50_95(run, gts, config);
  for (const auto& w : report.warnings) warn(w);
  return report;
}

detens::EvalConfig eval_config(const EvalOptions& o) {
  detens::EvalConfig config;
  config.min_confidence = o.min_conf;
  if (!o.iou_thresholds.empty()) config.iou_thresholds = o.iou_thresholds;
  config.pr_iou = o.pr_iou;
  config.ap_method =
      o.ap_method == "trapezoid" ? detens::ApMethod::kTrapezoid : detens::ApMethod::kCoco101;
  config.max_detections_per_image = o.max_dets;
  config.threads = o.threads;
  try {
    detens::validate(config);
  } catch (const detens::ConfigError& e) {
    throw UsageError(e.what());
  }
  return config;
}

void write_report(const detens::MetricsReport& report, const std::string& dir,
                  const std::string& summary_name) {
  ensure_dir(dir);
  const auto docs = detens::emit_metrics_report(report);
  detens::write_file((fs::path(dir) / summary_name).string(), docs.summary);
  for (const auto& [name, csv] : docs.pr_tables) {
    detens::write_file((fs::path(dir) / name).string(), csv);
  }
}

int run_eval(const EvalOptions& o) {
  const auto config = eval_config(o);
  const auto report = evaluate(o, config);
  write_report(report, o.out_dir, "metrics.json");
  std::printf("mAP50-95: %.6f\n", report.map_50_95);
  return 0;
}

int run_pr(EvalOptions o) {
  o.iou_thresholds = {o.pr_iou};
  const auto config = eval_config(o);
  const auto report = evaluate(o, config);
  write_report(report, o.out_dir, "pr_report.json");
  for (const auto& c : report.classes) {
    std::printf("AP[%s]: %.6f\n", c.name.c_str(), c.ap_pr_iou);
  }
  std::printf("mean_AP: %.6f\n", report.mean_ap_pr_iou);
  std::printf("pooled_AP: %.6f\n", report.pooled_ap_pr_iou);
  std::printf("f1_optimal_threshold: %.6f\n", report.f1.threshold);
  std::printf("f1: %.6f\n", report.f1.f1);
  return 0;
}

// ---------------------------------------------------------------------------
// weights

struct WeightsOptions {
  std::string gt;
  std::string scheme;
  std::string aggregation = "distinct";
  double log_base = std::numbers::e;
  std::string out;
};

int run_weights(const WeightsOptions& o) {
  const auto scheme = detens::parse_scheme(o.scheme);
  if (!scheme) throw UsageError("unknown --scheme '" + o.scheme + "'");
  const auto gts = load_ground_truth(o.gt);
  const auto counted = detens::counts_from_ground_truth(gts);
  detens::ClassWeightTable table;
  if (*scheme == detens::WeightScheme::kLossLog) {
    table = detens::loss_weights(counted, o.log_base);
  } else {
    table = detens::sampler_weights(counted);
    table.images = detens::image_sampling_weights(
        gts, table,
        o.aggregation == "instance" ? detens::ImageAggregation::kPerInstance
                                    : detens::ImageAggregation::kDistinctClasses);
  }
  for (const auto& w : table.warnings) warn(w);
  detens::write_file(o.out, detens::emit_weight_table(table));
  std::cout << "scheme: " << detens::scheme_name(table.scheme) << "\n"
            << "classes: " << table.classes.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  bool riva_profile = false;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> images;
  std::string out_dir;
};

int run_synth(const SynthOptions& o) {
  if (o.riva_profile == !o.scenario.empty()) {
    throw UsageError("give exactly one of --riva-profile and --scenario");
  }
  detens::ScenarioConfig config =
      o.riva_profile ? detens::riva_profile()
                     : detens::scenario_config_from_json(detens::read_file(o.scenario));
  if (o.seed) config.seed = *o.seed;
  if (o.images) config.image_count = *o.images;

  const detens::Scenario s = detens::generate(config);
  ensure_dir(o.out_dir);
  const fs::path dir(o.out_dir);
  detens::write_file((dir / "ground_truth.json").string(), detens::emit_ground_truth(s.ground_truth));
  for (const auto& run : s.runs) {
    detens::write_file((dir / ("detections_" + run.model_id + ".json")).string(),
                       detens::emit_detections(run));
  }
  detens::write_file((dir / "scenario.json").string(),
                     detens::scenario_config_to_json(config).dump(2) + "\n");
  std::cout << "images: " << s.ground_truth.images().size() << "\n"
            << "objects: " << s.ground_truth.box_count() << "\n";
  for (const auto& run : s.runs) {
    std::cout << "detections_" << run.model_id << ": " << run.detections.size() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted Boxes Fusion ensembling, mAP50-95 evaluation and class-imbalance "
               "weights for object detection."};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file; command-line flags override its values");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  FuseOptions fuse;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse several detection files with WBF");
  fuse_cmd->add_option("--det", fuse.detections, "Detection file (COCO results JSON or CSV)")
      ->required();
  fuse_cmd->add_option("--weights", fuse.weights, "Per-file ensemble weights (default: all 1)");
  fuse_cmd->add_option("--gt", fuse.gt, "Ground truth, used for the class catalog");
  fuse_cmd->add_option("--out", fuse.out, "Fused detections output")->required();
  fuse_cmd->add_option("--summary", fuse.summary, "Fusion summary (default: <out>.summary.json)");
  fuse_cmd->add_option("--iou", fuse.iou, "Fusion IoU threshold (inclusive)")
      ->capture_default_str()
      ->check(kIouRange);
  fuse_cmd->add_option("--min-conf", fuse.min_conf, "Confidence floor")
      ->capture_default_str()
      ->check(kConfidenceRange);
  fuse_cmd->add_flag("--no-normalize", fuse.no_normalize, "Use raw weights (no mean-1 scaling)");
  fuse_cmd->add_flag("--floor-raw", fuse.floor_raw, "Apply the floor to raw scores");
  fuse_cmd->add_option("--threads", fuse.threads)->capture_default_str()->check(CLI::Range(1, 256));

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Challenge-protocol mAP50-95 evaluation");
  EvalOptions pr;
  auto* pr_cmd = app.add_subcommand("pr", "Per-class PR curves, AP and F1-optimal threshold");
  for (auto [cmd, o] : {std::pair{eval_cmd, &eval}, std::pair{pr_cmd, &pr}}) {
    cmd->add_option("--gt", o->gt, "Ground truth (COCO annotation JSON)")
        ->required();
    cmd->add_option("--det", o->det, "Detections (COCO results JSON or CSV)")
        ->required();
    cmd->add_option("--out-dir", o->out_dir, "Report directory")->capture_default_str();
    cmd->add_option("--min-conf", o->min_conf, "Confidence floor")
        ->capture_default_str()
        ->check(kConfidenceRange);
    cmd->add_option("--ap-method", o->ap_method, "AP interpolation")
        ->capture_default_str()
        ->check(CLI::IsMember({"coco101", "trapezoid"}));
    cmd->add_option("--max-dets", o->max_dets, "Per-image, per-class detection cap (0: none)")
        ->capture_default_str();
    cmd->add_option("--threads", o->threads)->capture_default_str()->check(CLI::Range(1, 256));
  }
  eval_cmd->add_option("--iou-thresholds", eval.iou_thresholds,
                       "IoU thresholds (default 0.50:0.05:0.95)")
      ->check(kIouRange);
  eval_cmd->add_option("--pr-iou", eval.pr_iou, "IoU for PR tables and F1")
      ->capture_default_str()
      ->check(kIouRange);
  pr_cmd->add_option("--iou", pr.pr_iou, "Matching IoU threshold")
      ->capture_default_str()
      ->check(kIouRange);

  WeightsOptions weights;
  auto* weights_cmd = app.add_subcommand("weights", "Class-imbalance weight tables");
  weights_cmd->add_option("--gt", weights.gt, "Ground truth (COCO annotation JSON)")
      ->required();
  weights_cmd->add_option("--scheme", weights.scheme, "loss-log or sampler-sqrt")
      ->required()
      ->check(CLI::IsMember({"loss-log", "sampler-sqrt", "loss_log", "sampler_sqrt"}));
  weights_cmd->add_option("--aggregation", weights.aggregation,
                          "Image weight aggregation over distinct classes or instances")
      ->capture_default_str()
      ->check(CLI::IsMember({"distinct", "instance"}));
  weights_cmd->add_option("--log-base", weights.log_base, "Logarithm base for loss-log");
  weights_cmd->add_option("--out", weights.out, "Weight table output")->required();

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic scenario");
  synth_cmd->add_flag("--riva-profile", synth.riva_profile, "Use the built-in 8-class profile");
  synth_cmd->add_option("--scenario", synth.scenario, "Scenario config (JSON)");
  synth_cmd->add_option("--seed", synth.seed, "Override the scenario seed");
  synth_cmd->add_option("--images", synth.images, "Override the image count");
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*fuse_cmd) return run_fuse(fuse);
    if (*eval_cmd) return run_eval(eval);
    if (*pr_cmd) return run_pr(pr);
    if (*weights_cmd) return run_weights(weights);
    if (*synth_cmd) return run_synth(synth);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const detens::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitData;
  } catch (const detens::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
