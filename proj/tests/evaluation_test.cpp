// Copyright 2026 The ctxseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <vector>

#include "ctxseg.hpp"

namespace ctxseg {
namespace {

VideoSequence with_areas(const std::vector<double>& areas) {
  std::vector<Region> regions;
  for (std::size_t i = 0; i < areas.size(); ++i) {
    Region r;
    r.id = static_cast<RegionId>(i);
    r.frame = 0;
    r.feature = {1.0};
    r.area = areas[i];
    regions.push_back(std::move(r));
  }
  return VideoSequence::build(std::move(regions), {}, {std::nullopt, 4});
}

TEST(Evaluation, IdentityScoresOne) {
  const auto seq = with_areas({1, 2, 3, 4});
  const Labels gt{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  const auto r = iou_per_class(gt, gt, seq);
  EXPECT_EQ(r.mean_iou, 1.0);
  EXPECT_EQ(r.per_class_iou.size(), 3U);
  EXPECT_FALSE(r.per_class_iou.contains(kBackground));
}

TEST(Evaluation, DisjointScoresZero) {
  const auto seq = with_areas({1, 2});
  const Labels gt{{0, 1}, {1, 2}};
  const Labels pred{{0, 2}, {1, 1}};
  const auto r = iou_per_class(pred, gt, seq);
  EXPECT_EQ(r.per_class_iou.at(1), 0.0);
  EXPECT_EQ(r.per_class_iou.at(2), 0.0);
  EXPECT_EQ(r.mean_iou, 0.0);
}

TEST(Evaluation, AreaWeightedPartialOverlap) {
  // Intersection 10, union 10 + 10 + 20.
  const auto seq = with_areas({10, 10, 20});
  const Labels gt{{0, 1}, {1, 1}, {2, 0}};
  const Labels pred{{0, 1}, {1, 0}, {2, 1}};
  const auto r = iou_per_class(pred, gt, seq);
  EXPECT_EQ(r.per_class_iou.at(1), 0.25);
  EXPECT_EQ(r.mean_iou, 0.25);
}

TEST(Evaluation, FalsePositivesEnlargeTheUnion) {
  // Class 1 truth area 10, predicted on areas 10 and 30 (a background region).
  const auto seq = with_areas({10, 30});
  const Labels gt{{0, 1}, {1, 0}};
  const Labels pred{{0, 1}, {1, 1}};
  EXPECT_EQ(iou_per_class(pred, gt, seq).per_class_iou.at(1), 0.25);
}

TEST(Evaluation, MissingPredictionMatchesNothing) {
  const auto seq = with_areas({10, 30});
  const Labels gt{{0, 1}, {1, 1}};
  EXPECT_EQ(iou_per_class({{0, 1}}, gt, seq).per_class_iou.at(1), 0.25);
}

TEST(Evaluation, RandomLabelingsSymmetricBoundedAndSplitInvariant) {
  std::mt19937_64 g(8);
  std::uniform_real_distribution<double> area(1.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(g() % 12);
    std::vector<double> areas;
    Labels gt, pred;
    for (int i = 0; i < n; ++i) {
      areas.push_back(area(g));
      gt[i] = static_cast<ClassId>(g() % 4);
      pred[i] = static_cast<ClassId>(g() % 4);
    }
    const auto seq = with_areas(areas);
    const auto a = iou_per_class(pred, gt, seq);
    const auto b = iou_per_class(gt, pred, seq);
    for (const auto& [cls, v] : a.per_class_iou) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      if (b.per_class_iou.contains(cls)) {
        EXPECT_NEAR(v, b.per_class_iou.at(cls), 1e-12);
      }
    }

    // Split region 0 into two halves with the same labels.
    auto split_areas = areas;
    split_areas[0] /= 2.0;
    split_areas.push_back(areas[0] / 2.0);
    Labels gt2 = gt, pred2 = pred;
    gt2[n] = gt.at(0);
    pred2[n] = pred.at(0);
    const auto c = iou_per_class(pred2, gt2, with_areas(split_areas));
    EXPECT_EQ(c.per_class_iou.size(), a.per_class_iou.size());
    for (const auto& [cls, v] : a.per_class_iou) EXPECT_NEAR(c.per_class_iou.at(cls), v, 1e-12);
    EXPECT_NEAR(c.mean_iou, a.mean_iou, 1e-12);
  }
}

TEST(Evaluation, Errors) {
  const auto seq = with_areas({1});
  EXPECT_THROW(iou_per_class({}, {}, seq), Error);
  EXPECT_THROW(iou_per_class({}, {{5, 1}}, seq), Error);
}

TEST(Evaluation, ReportPrintsMean) {
  const auto seq = with_areas({10, 30});
  const auto r = iou_per_class({{0, 1}}, {{0, 1}, {1, 1}}, seq);
  std::ostringstream out;
  print_report(out, r);
  EXPECT_NE(out.str().find("mean   0.2500"), std::string::npos);
  EXPECT_EQ(report_json(r)["mean"], 0.25);
}

}  // namespace
}  // namespace ctxseg
