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

#include <filesystem>
#include <fstream>

#include "ctxseg.hpp"

namespace ctxseg {
namespace {

TEST(Config, JsonRoundTrip) {
  PipelineConfig c;
  c.k = 7;
  c.mu = 0.5;
  c.literal_alg1 = true;
  c.seed = 0xFFFFFFFFFFFFFFFFULL;
  c.pair_window = -1;
  c.class_count = 5;
  const nlohmann::json j = c;
  const auto back = j.get<PipelineConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.pair_window, -1);
  EXPECT_FALSE(back.frame_count.has_value());
}

TEST(Config, UnknownKeyAndWrongTypeAreRejected) {
  PipelineConfig c;
  EXPECT_THROW(merge_config(c, {{"kk", 3}}), Error);
  EXPECT_THROW(merge_config(c, {{"k", "three"}}), Error);
  EXPECT_THROW(merge_config(c, {{"class_count", 2.5}}), Error);
  EXPECT_THROW(merge_config(c, nlohmann::json::array()), Error);
}

TEST(Config, FileOverridesDefaultsOnlyForPresentKeys) {
  const auto path = std::filesystem::temp_directory_path() / "ctxseg_config_test.json";
  {
    std::ofstream out(path);
    out << R"({"k": 5, "rho": 0.25, "pair_window": null})";
  }
  PipelineConfig base;
  base.mu = 0.8;
  base.pair_window = 2;
  const auto c = load_config(path, base);
  EXPECT_EQ(c.k, 5);
  EXPECT_EQ(c.rho, 0.25);
  EXPECT_EQ(c.mu, 0.8);
  EXPECT_FALSE(c.pair_window.has_value());
  std::filesystem::remove(path);
  EXPECT_THROW(load_config(path), Error);
}

TEST(Config, ValidationNamesTheField) {
  PipelineConfig c;
  c.validate();
  c.mu = 1.0;
  try {
    c.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("config: mu", 0), 0U);
  }
}

TEST(Config, PairWindowFollowsTemporalWindow) {
  PipelineConfig c;
  EXPECT_EQ(c.effective_pair_window(), 0);
  c.temporal_window = 3;
  EXPECT_EQ(c.effective_pair_window(), 3);
  c.pair_window = -1;
  EXPECT_EQ(c.effective_pair_window(), -1);
}

}  // namespace
}  // namespace ctxseg
