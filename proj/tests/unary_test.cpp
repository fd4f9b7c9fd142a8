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

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"

namespace ctxseg {
namespace {

VideoSequence sequence_of(const std::vector<std::vector<double>>& features) {
  std::vector<Region> regions;
  for (std::size_t i = 0; i < features.size(); ++i) {
    Region r;
    r.id = static_cast<RegionId>(i);
    r.frame = 0;
    r.feature = features[i];
    r.area = 1.0;
    regions.push_back(std::move(r));
  }
  return VideoSequence::build(std::move(regions), {}, {std::nullopt, 4});
}

// Two classes around opposite poles, plus a third on an orthogonal axis.
struct Blobs {
  std::vector<std::vector<double>> features;
  std::vector<ClassId> targets;
};

Blobs blobs(std::uint64_t seed, int per_class) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> noise(0.0, 0.05);
  const std::vector<std::vector<double>> centers{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}};
  Blobs b;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per_class; ++i) {
      auto f = centers[c];
      for (double& v : f) v += noise(g);
      normalize_l2(f);
      b.features.push_back(f);
      b.targets.push_back(c + 1);
    }
  }
  return b;
}

const std::vector<ClassId> kClasses{1, 2, 3};

TEST(Unary, SeparableDataIsFitExactly) {
  const auto b = blobs(1, 20);
  const auto model = train_unary(b.features, b.targets, kClasses);
  for (std::size_t i = 0; i < b.features.size(); ++i) {
    EXPECT_EQ(kClasses[model.predict(b.features[i])], b.targets[i]);
  }
}

TEST(Unary, PolesGetMajorityProbability) {
  const auto b = blobs(2, 20);
  const auto model = train_unary(b.features, b.targets, kClasses);
  EXPECT_GT(model.probabilities(std::vector<double>{1, 0, 0})[0], 0.5);
  EXPECT_GT(model.probabilities(std::vector<double>{-1, 0, 0})[1], 0.5);
  EXPECT_GT(model.probabilities(std::vector<double>{0, 1, 0})[2], 0.5);
}

TEST(Unary, TrainingIsBitwiseDeterministic) {
  const auto b = blobs(3, 15);
  const auto m1 = train_unary(b.features, b.targets, kClasses, {50, 1e-3, 99});
  const auto m2 = train_unary(b.features, b.targets, kClasses, {50, 1e-3, 99});
  EXPECT_EQ(m1.weights, m2.weights);
  const auto m3 = train_unary(b.features, b.targets, kClasses, {50, 1e-3, 100});
  EXPECT_NE(m1.weights, m3.weights);
}

TEST(Unary, MissingClassIsAnError) {
  const auto b = blobs(4, 5);
  const std::vector<ClassId> classes{1, 2, 3, 7};
  try {
    (void)train_unary(b.features, b.targets, classes);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("7"), std::string::npos);
  }
}

TEST(Unary, LabelOutsideClassesIsAnError) {
  const auto b = blobs(4, 5);
  const std::vector<ClassId> classes{1, 2};
  EXPECT_THROW((void)train_unary(b.features, b.targets, classes), Error);
}

TEST(Unary, IdenticalFeaturesWarn) {
  const std::vector<std::vector<double>> f(4, std::vector<double>{0.6, 0.8});
  const std::vector<ClassId> t{1, 2, 1, 2};
  const std::vector<ClassId> classes{1, 2};
  std::vector<std::string> warnings;
  ScopedWarningSink sink([&](std::string_view m) { warnings.emplace_back(m); });
  (void)train_unary(f, t, classes);
  ASSERT_EQ(warnings.size(), 1U);
  EXPECT_NE(warnings[0].find("identical"), std::string::npos);
}

TEST(UnaryPotentials, CostExamples) {
  UnaryModel uniform;
  uniform.classes = {0, 1, 2, 3};
  uniform.dim = 1;
  uniform.weights.assign(8, 0.0);
  const auto seq = sequence_of({{1.0}});
  const auto t = unary_potentials(uniform, seq);
  for (int a = 0; a < 4; ++a) EXPECT_NEAR(t.at(0, a), std::log(4.0), 1e-12);

  // A certain prediction costs 0; the floored alternatives cost -log 1e-6.
  UnaryModel sure = uniform;
  sure.weights[1] = 1000.0;
  const auto s = unary_potentials(sure, seq);
  EXPECT_NEAR(s.at(0, 0), 0.0, 1e-12);
  for (int a = 1; a < 4; ++a) EXPECT_NEAR(s.at(0, a), 13.8155, 1e-4);
  EXPECT_THROW((void)unary_potentials(sure, seq, 0.0), Error);
}

TEST(UnaryPotentials, ProbabilitiesSumToOne) {
  const auto b = blobs(5, 10);
  const auto model = train_unary(b.features, b.targets, kClasses);
  std::mt19937_64 g(6);
  for (int i = 0; i < 100; ++i) {
    const auto f = testing::random_unit(g, 3);
    const auto p = model.probabilities(f);
    double s = 0.0;
    for (const double v : p) {
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

}  // namespace
}  // namespace ctxseg
