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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "detens/weights.hpp"
#include "support/generators.hpp"

namespace detens {
namespace {

constexpr int kCases = 1000;

// Cytology reference counts.
const std::vector<ClassCatalog::Entry> kRivaClasses{
    {1, "NILM"}, {2, "INFL"}, {3, "ENDO"}, {4, "ASCUS"},
    {5, "LSIL"}, {6, "ASCH"}, {7, "HSIL"}, {8, "SCC"}};
const std::vector<std::uint64_t> kRivaCounts{9457, 8190, 1270, 356, 3048, 416, 1835, 1586};

// -ln(c/26158) and sqrt(26158/c), evaluated with 40-digit arithmetic.
const std::vector<double> kLossOracle{
    1.0173998630335855225, 1.1612411732019825766, 3.0251381705964607275,
    4.2969796191970672274, 2.1496694332425607918, 4.1412250897878344014,
    2.6571105895604270383, 2.8029399478543043903};
const std::vector<double> kSamplerOracle{
    1.6631276090576237691, 1.7871471662666714743, 4.538375303310732961,
    8.5719034111384876506, 2.9295086614269171817, 7.9296789148305174178,
    3.7755848383971727281, 4.0611653884982871852};

ClassCatalog riva() { return ClassCatalog(kRivaClasses, kRivaCounts); }

ClassCatalog catalog_with(const std::vector<std::uint64_t>& counts) {
  std::vector<ClassCatalog::Entry> entries;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    entries.push_back({static_cast<CategoryId>(i + 1), "k" + std::to_string(i + 1)});
  }
  return ClassCatalog(entries, counts);
}

TEST(LossWeightsTest, ReferenceCountsMatchHighPrecisionValues) {
  const auto t = loss_weights(riva());
  ASSERT_EQ(t.classes.size(), 8u);
  EXPECT_EQ(t.total, 26158u);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(t.classes[i].weight, kLossOracle[i], 1e-12) << t.classes[i].name;
  }
  EXPECT_NEAR(t.find("NILM")->weight, 1.0174, 5e-5);
  EXPECT_NEAR(t.find("ASCUS")->weight, 4.2970, 5e-5);
}

TEST(LossWeightsTest, UniformCountsGiveLogK) {
  const auto t = loss_weights(catalog_with(std::vector<std::uint64_t>(8, 17)));
  for (const auto& c : t.classes) EXPECT_NEAR(c.weight, 2.0794415416798359283, 1e-15);
}

TEST(LossWeightsTest, SingleClassWarns) {
  const auto t = loss_weights(catalog_with({42}));
  ASSERT_EQ(t.classes.size(), 1u);
  EXPECT_EQ(t.classes[0].weight, 0.0);
  EXPECT_FALSE(std::signbit(t.classes[0].weight));
  EXPECT_EQ(t.warnings.size(), 1u);
}

TEST(LossWeightsTest, LogBaseRescales) {
  const auto t = loss_weights(catalog_with({1, 1, 1, 1}), 2.0);
  for (const auto& c : t.classes) EXPECT_NEAR(c.weight, 2.0, 1e-15);
  EXPECT_THROW(loss_weights(riva(), 1.0), ConfigError);
  EXPECT_THROW(loss_weights(riva(), -2.0), ConfigError);
}

TEST(WeightSchemesTest, ZeroCountNamesTheClass) {
  for (auto fn : {+[](const ClassCatalog& c) { return loss_weights(c); },
                  +[](const ClassCatalog& c) { return sampler_weights(c); }}) {
    try {
      fn(catalog_with({5, 0, 3}));
      FAIL() << "expected DegenerateClassError";
    } catch (const DegenerateClassError& e) {
      EXPECT_EQ(e.class_name(), "k2");
      EXPECT_NE(std::string(e.what()).find("k2"), std::string::npos);
    }
  }
  EXPECT_THROW(loss_weights(ClassCatalog({{1, "a"}})), ConfigError);
  EXPECT_THROW(sampler_weights(catalog_with({0, 0})), ConfigError);
}

TEST(SamplerWeightsTest, ReferenceCountsMatchHighPrecisionValues) {
  const auto t = sampler_weights(riva());
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(t.classes[i].weight, kSamplerOracle[i], 1e-12) << t.classes[i].name;
  }
  EXPECT_NEAR(t.find("ASCUS")->weight, 8.5719, 5e-5);
  EXPECT_NEAR(t.find("NILM")->weight, 1.6631, 5e-5);
}

TEST(SamplerWeightsTest, UniformCountsGiveRootK) {
  for (std::size_t k = 1; k <= 12; ++k) {
    const auto t = sampler_weights(catalog_with(std::vector<std::uint64_t>(k, 3)));
    for (const auto& c : t.classes) EXPECT_NEAR(c.weight, std::sqrt(static_cast<double>(k)), 1e-15);
  }
}

TEST(SamplerWeightsTest, TwoClassHandValues) {
  const auto t = sampler_weights(catalog_with({1, 3}));
  EXPECT_EQ(t.classes[0].weight, 2.0);
  EXPECT_NEAR(t.classes[1].weight, 1.154700538379251529, 1e-15);
}

GroundTruthSet riva_images(const std::vector<std::vector<CategoryId>>& images) {
  GroundTruthSet gts{ClassCatalog(kRivaClasses)};
  for (std::size_t i = 0; i < images.size(); ++i) {
    const ImageId id = std::to_string(i + 1);
    gts.add_image(id);
    for (std::size_t k = 0; k < images[i].size(); ++k) {
      const double x = 20.0 * static_cast<double>(k);
      gts.add(GroundTruthBox{id, images[i][k], BoundingBox(x, 0, x + 10, 10)});
    }
  }
  return gts;
}

TEST(ImageWeightsTest, ReferenceExamples) {
  const auto table = sampler_weights(riva());
  const auto w = image_sampling_weights(riva_images({{1, 1}, {1, 4}}), table);
  ASSERT_EQ(w.images.size(), 2u);
  EXPECT_NEAR(w.images[0].weight, kSamplerOracle[0], 1e-12);
  EXPECT_NEAR(w.images[1].weight, 5.1175155100980557098, 1e-12);
  EXPECT_NEAR(w.images[1].weight, 5.1175, 5e-5);
}

TEST(ImageWeightsTest, EqualRawWeightsNormalizeToHalf) {
  const auto table = sampler_weights(catalog_with({1, 1}));  // sqrt 2 each
  GroundTruthSet gts(catalog_with({1, 1}));
  gts.add(GroundTruthBox{"a", 1, BoundingBox(0, 0, 1, 1)});
  gts.add(GroundTruthBox{"b", 2, BoundingBox(0, 0, 1, 1)});
  const auto w = image_sampling_weights(gts, table);
  EXPECT_EQ(w.images[0].probability, 0.5);
  EXPECT_EQ(w.images[1].probability, 0.5);
}

TEST(ImageWeightsTest, EmptyImagesGetSmallestWeight) {
  const auto table = sampler_weights(riva());
  const auto w = image_sampling_weights(riva_images({{4}, {}, {1}}), table);
  EXPECT_EQ(w.images[1].weight, w.images[2].weight);
  const auto all_empty = image_sampling_weights(riva_images({{}, {}}), table);
  EXPECT_EQ(all_empty.images[0].probability, 0.5);
}

TEST(ImageWeightsTest, PerInstanceAggregation) {
  const auto table = sampler_weights(riva());
  const auto w = image_sampling_weights(riva_images({{1, 1, 4}}), table,
                                        ImageAggregation::kPerInstance);
  EXPECT_NEAR(w.images[0].weight, (2 * kSamplerOracle[0] + kSamplerOracle[3]) / 3, 1e-12);
}

TEST(ImageWeightsTest, RejectsMismatchedTables) {
  EXPECT_THROW(image_sampling_weights(riva_images({{1}}), loss_weights(riva())), ConfigError);
  ClassCatalog partial({{1, "NILM"}}, std::vector<std::uint64_t>{5});
  EXPECT_THROW(image_sampling_weights(riva_images({{1, 4}}), sampler_weights(partial)),
               ConfigError);
}

TEST(CountsFromGroundTruthTest, Examples) {
  const auto empty = counts_from_ground_truth(GroundTruthSet(ClassCatalog(kRivaClasses)));
  EXPECT_EQ(*empty.counts(), std::vector<std::uint64_t>(8, 0));
  const auto three = counts_from_ground_truth(riva_images({{5, 5}, {5}}));
  EXPECT_EQ((*three.counts())[4], 3u);
  EXPECT_EQ(three.total_count(), 3u);
}

std::vector<std::uint64_t> random_counts(testing::Gen& g) {
  std::vector<std::uint64_t> counts(g.index(2, 10));
  for (auto& c : counts) c = g.index(1, 20000);
  return counts;
}

TEST(WeightsProperty, RarerClassesWeighMore) {
  for (int s = 0; s < kCases; ++s) {
    testing::Gen g(s);
    const auto counts = random_counts(g);
    const auto cat = catalog_with(counts);
    for (const auto& t : {loss_weights(cat), sampler_weights(cat)}) {
      for (std::size_t j = 0; j < counts.size(); ++j) {
        for (std::size_t k = 0; k < counts.size(); ++k) {
          if (counts[j] < counts[k]) {
            ASSERT_GT(t.classes[j].weight, t.classes[k].weight) << "seed " << s;
          }
        }
      }
    }
  }
}

TEST(WeightsProperty, InvariantUnderCountScaling) {
  for (int s = 0; s < kCases; ++s) {
    testing::Gen g(s);
    const auto counts = random_counts(g);
    auto scaled = counts;
    const std::uint64_t m = g.index(2, 1000);
    for (auto& c : scaled) c *= m;
    const auto a = catalog_with(counts);
    const auto b = catalog_with(scaled);
    const auto la = loss_weights(a), lb = loss_weights(b);
    const auto sa = sampler_weights(a), sb = sampler_weights(b);
    for (std::size_t k = 0; k < counts.size(); ++k) {
      ASSERT_NEAR(la.classes[k].weight, lb.classes[k].weight, 1e-12) << "seed " << s;
      ASSERT_NEAR(sa.classes[k].weight, sb.classes[k].weight, 1e-12) << "seed " << s;
      ASSERT_NEAR(sa.classes[k].weight / sa.classes[0].weight,
                  sb.classes[k].weight / sb.classes[0].weight, 1e-12);
    }
  }
}

GroundTruthSet random_images(testing::Gen& g, std::size_t classes) {
  GroundTruthSet gts(catalog_with(std::vector<std::uint64_t>(classes, 1)));
  const std::size_t n = g.index(1, 12);
  for (std::size_t i = 0; i < n; ++i) {
    const ImageId id = "img" + std::to_string(i);
    gts.add_image(id);
    for (std::size_t k = g.index(0, 6); k > 0; --k) {
      gts.add(GroundTruthBox{id, static_cast<CategoryId>(g.index(1, classes)), g.box()});
    }
  }
  return gts;
}

TEST(WeightsProperty, DuplicatingAnObjectLeavesImageWeightsUnchanged) {
  for (int s = 0; s < kCases; ++s) {
    testing::Gen g(s);
    const std::size_t classes = g.index(2, 8);
    const GroundTruthSet gts = random_images(g, classes);
    std::vector<std::uint64_t> counts(classes);
    for (auto& c : counts) c = g.index(1, 5000);
    const auto weights = sampler_weights(catalog_with(counts));
    GroundTruthSet dup = gts;
    std::vector<const GroundTruthBox*> present;
    for (const auto& [id, boxes] : gts.images()) {
      for (const auto& b : boxes) present.push_back(&b);
    }
    if (present.empty()) continue;
    const GroundTruthBox copy = *present[g.index(0, present.size() - 1)];
    dup.add(GroundTruthBox{copy.image_id, copy.category_id, g.box()});
    const auto a = image_sampling_weights(gts, weights);
    const auto b = image_sampling_weights(dup, weights);
    ASSERT_EQ(a.images.size(), b.images.size());
    for (std::size_t i = 0; i < a.images.size(); ++i) {
      ASSERT_EQ(a.images[i].weight, b.images[i].weight) << "seed " << s;
      ASSERT_EQ(a.images[i].probability, b.images[i].probability) << "seed " << s;
    }
  }
}

TEST(WeightsProperty, ImageProbabilitiesFormADistribution) {
  for (int s = 0; s < kCases; ++s) {
    testing::Gen g(s);
    const std::size_t classes = g.index(1, 8);
    const GroundTruthSet gts = random_images(g, classes);
    std::vector<std::uint64_t> counts(classes);
    for (auto& c : counts) c = g.index(1, 5000);
    for (auto mode : {ImageAggregation::kDistinctClasses, ImageAggregation::kPerInstance}) {
      const auto w = image_sampling_weights(gts, sampler_weights(catalog_with(counts)), mode);
      double sum = 0.0;
      for (const auto& img : w.images) {
        ASSERT_GT(img.probability, 0.0) << "seed " << s;
        sum += img.probability;
      }
      ASSERT_NEAR(sum, 1.0, 1e-12) << "seed " << s;
    }
  }
}

}  // namespace
}  // namespace detens
