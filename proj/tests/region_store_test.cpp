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

#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

namespace ctxseg {
namespace {

std::string region_line(RegionId id, int frame, const std::string& feature, double area = 10.0) {
  return "{\"id\":" + std::to_string(id) + ",\"frame\":" + std::to_string(frame) + ",\"feature\":" + feature +
         ",\"area\":" + std::to_string(area) + "}\n";
}

VideoSequence load(const std::string& regions, const std::string& detections = "", IngestConfig cfg = {}) {
  std::istringstream r(regions);
  std::istringstream d(detections);
  return load_sequence(r, d, cfg);
}

TEST(RegionStore, NormalizesThreeFourFive) {
  const auto seq = load(region_line(0, 0, "[3,4]"));
  EXPECT_DOUBLE_EQ(seq.region(0).feature[0], 0.6);
  EXPECT_DOUBLE_EQ(seq.region(0).feature[1], 0.8);
  EXPECT_FALSE(seq.region(0).degenerate);
}

TEST(RegionStore, ZeroFeatureIsKeptAndFlagged) {
  const auto seq = load(region_line(0, 0, "[0,0]"));
  EXPECT_EQ(seq.region(0).feature, (std::vector<double>{0.0, 0.0}));
  EXPECT_TRUE(seq.region(0).degenerate);
}

TEST(RegionStore, DuplicateIdNamesTheId) {
  try {
    load(region_line(7, 0, "[1,0]") + region_line(7, 1, "[0,1]"));
    FAIL() << "expected a duplicate-id error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate region id 7"), std::string::npos) << e.what();
  }
}

TEST(RegionStore, MalformedLineReportsLineNumber) {
  try {
    load(region_line(0, 0, "[1,0]") + "\n{\"id\": 1, \"frame\": \n");
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST(RegionStore, RejectsDimensionMismatch) {
  EXPECT_THROW(load(region_line(0, 0, "[1,0]") + region_line(1, 0, "[1,0,0]")), Error);
}

TEST(RegionStore, RejectsFrameOutsideSequence) {
  EXPECT_THROW(load(region_line(0, 5, "[1,0]"), "", {3, std::nullopt}), Error);
}

TEST(RegionStore, RejectsNonPositiveArea) { EXPECT_THROW(load(region_line(0, 0, "[1,0]", 0.0)), Error); }

TEST(RegionStore, RejectsBadDetections) {
  const std::string r = region_line(0, 0, "[1,0]");
  EXPECT_THROW(load(r, "{\"frame\":0,\"bbox\":[0,0,1,1],\"class\":1,\"confidence\":1.5}\n"), Error);
  EXPECT_THROW(load(r, "{\"frame\":0,\"bbox\":[0,0,0,1],\"class\":1,\"confidence\":0.5}\n"), Error);
}

TEST(RegionStore, OrdersRegionsByFrameThenId) {
  const auto seq = load(region_line(9, 1, "[1,0]") + region_line(3, 0, "[1,0]") + region_line(1, 1, "[0,1]"));
  ASSERT_EQ(seq.size(), 3);
  EXPECT_EQ(seq.region(0).id, 3);
  EXPECT_EQ(seq.region(1).id, 1);
  EXPECT_EQ(seq.region(2).id, 9);
  EXPECT_EQ(seq.index_of(9), 2);
  EXPECT_EQ(seq.index_of(42), std::nullopt);
  EXPECT_EQ(seq.frame_range(1), (std::pair<int, int>{1, 3}));
}

TEST(RegionStore, EmptyFramesAreAllowed) {
  const auto seq = load(region_line(0, 0, "[1,0]") + region_line(1, 3, "[1,0]"));
  EXPECT_EQ(seq.frame_count(), 4);
  EXPECT_EQ(seq.frame_range(1).first, seq.frame_range(1).second);
}

std::vector<Detection> with_confidences(std::initializer_list<double> c) {
  std::vector<Detection> out;
  for (const double v : c) out.push_back({0, {0, 0, 1, 1}, 1, v});
  return out;
}

TEST(FilterDetections, ThresholdIsStrict) {
  const auto kept = filter_detections(with_confidences({0.4, 0.5, 0.9}), 0.5);
  ASSERT_EQ(kept.size(), 1U);
  EXPECT_EQ(kept[0].confidence, 0.9);
}

TEST(FilterDetections, ZeroThresholdKeepsPositiveConfidences) {
  EXPECT_EQ(filter_detections(with_confidences({0.1, 0.2, 0.7}), 0.0).size(), 3U);
}

TEST(FilterDetections, EmptyInput) { EXPECT_TRUE(filter_detections(std::vector<Detection>{}, 0.5).empty()); }

TEST(FilterDetections, PreservesOrder) {
  const auto kept = filter_detections(with_confidences({0.9, 0.1, 0.6, 0.8}), 0.5);
  ASSERT_EQ(kept.size(), 3U);
  EXPECT_EQ(kept[0].confidence, 0.9);
  EXPECT_EQ(kept[1].confidence, 0.6);
  EXPECT_EQ(kept[2].confidence, 0.8);
}

TEST(FilterDetections, SequenceOverloadValidatesThreshold) {
  const auto seq = load(region_line(0, 0, "[1,0]"));
  EXPECT_THROW(filter_detections(seq, 1.5), Error);
}

TEST(GroundTruth, LoadsValidEntries) {
  const auto seq = load(region_line(0, 0, "[1,0]") + region_line(1, 0, "[0,1]"), "", {std::nullopt, 3});
  std::istringstream in("{\"id\":0,\"class\":1}\n{\"id\":1,\"class\":2}\n");
  const auto gt = load_ground_truth(in, seq);
  EXPECT_EQ(gt, (Labels{{0, 1}, {1, 2}}));
}

TEST(GroundTruth, UnknownIdIsAnError) {
  const auto seq = load(region_line(0, 0, "[1,0]"), "", {std::nullopt, 3});
  std::istringstream in("{\"id\":999,\"class\":1}\n");
  EXPECT_THROW(load_ground_truth(in, seq), Error);
}

TEST(GroundTruth, ClassOutOfRangeIsAnError) {
  const auto seq = load(region_line(0, 0, "[1,0]"), "", {std::nullopt, 2});
  std::istringstream in("{\"id\":0,\"class\":2}\n");
  EXPECT_THROW(load_ground_truth(in, seq), Error);
}

TEST(GroundTruth, EmptyFileGivesEmptyMap) {
  const auto seq = load(region_line(0, 0, "[1,0]"));
  std::istringstream in("");
  EXPECT_TRUE(load_ground_truth(in, seq).empty());
}

TEST(RegionStore, RoundTripIsIdempotent) {
  std::mt19937_64 g(11);
  std::vector<Region> regions;
  for (int i = 0; i < 40; ++i) {
    Region r;
    r.id = 100 - i;
    r.frame = i % 5;
    r.area = 1.0 + i;
    r.feature = testing::random_unit(g, 6);
    for (double& v : r.feature) v *= 3.7;
    if (i % 2 == 0) r.bbox = Box{1.5 * i, 2.0, 3.25, 4.0};
    regions.push_back(std::move(r));
  }
  const std::vector<Detection> dets{{1, {0.5, 0.25, 3, 4}, 2, 0.123456789012345}};
  const auto first = VideoSequence::build(regions, dets);
  std::ostringstream rs, ds;
  write_regions(rs, first.regions());
  write_detections(ds, first.detections());
  std::istringstream ri(rs.str()), di(ds.str());
  const auto second = load_sequence(ri, di);
  ASSERT_EQ(first.size(), second.size());
  for (int v = 0; v < first.size(); ++v) {
    EXPECT_EQ(first.region(v).id, second.region(v).id);
    for (std::size_t c = 0; c < first.dim(); ++c) {
      EXPECT_NEAR(first.region(v).feature[c], second.region(v).feature[c], 1e-15);
    }
    EXPECT_EQ(first.region(v).bbox, second.region(v).bbox);
    EXPECT_EQ(first.region(v).area, second.region(v).area);
  }
  EXPECT_EQ(second.detections()[0].confidence, dets[0].confidence);
  EXPECT_EQ(second.class_count(), first.class_count());
}

TEST(RegionStore, FeaturesHaveUnitNormAfterLoad) {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  std::vector<Region> regions;
  for (int i = 0; i < 200; ++i) {
    Region r;
    r.id = i;
    r.area = 1.0;
    for (int c = 0; c < 12; ++c) r.feature.push_back(u(g) * std::pow(10.0, (i % 7) - 3));
    regions.push_back(std::move(r));
  }
  const auto seq = VideoSequence::build(regions, {});
  for (const auto& r : seq.regions()) {
    double s = 0.0;
    for (const double v : r.feature) s += v * v;
    EXPECT_NEAR(std::sqrt(s), 1.0, 1e-6);
  }
}

TEST(RegionStore, LabelsSkipSummaryRecords) {
  std::istringstream in("{\"id\":4,\"class\":1}\n{\"energy\":-3.5,\"sweeps\":2}\n");
  EXPECT_EQ(read_labels(in), (Labels{{4, 1}}));
}

}  // namespace
}  // namespace ctxseg
