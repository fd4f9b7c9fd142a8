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

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <string>

#include "ctxseg/common.hpp"

namespace ctxseg {

// Every tunable of the pipeline. JSON keys match the field names.
struct PipelineConfig {
  // similarity graph
  int k = 20;
  // link propagation
  double mu = 0.99;
  double tol = 1e-6;
  int max_iters = 1000;
  double prune_eps = 1e-8;
  bool literal_alg1 = false;
  // trajectories
  double det_threshold = 0.5;
  double iou_threshold = 0.5;
  int min_instances = 3;
  int max_miss = 5;
  double rho = 0.5;
  // context exemplars
  int temporal_window = 0;
  bool include_bg_pairs = false;
  // CRF
  double lambda_pair = 1.0;
  double p_floor = 1e-6;
  int max_sweeps = 10;
  // Maximum frame distance of CRF pairs; unset follows temporal_window,
  // negative instantiates every scored pair.
  std::optional<int> pair_window;
  bool no_context = false;
  // unary classifier
  int unary_epochs = 100;
  double unary_lambda = 1e-3;
  // run
  std::uint64_t seed = 0;
  int threads = 1;
  std::optional<int> class_count;
  std::optional<int> frame_count;

  void validate() const {
    auto fail = [](const std::string& m) { throw Error("config: " + m); };
    if (k < 1) fail("k must be at least 1");
    if (!(mu > 0.0 && mu < 1.0)) fail("mu must lie in (0, 1)");
    if (!(tol > 0.0)) fail("tol must be positive");
    if (max_iters < 1) fail("max_iters must be at least 1");
    if (!(prune_eps >= 0.0)) fail("prune_eps must be non-negative");
    if (!(det_threshold >= 0.0 && det_threshold <= 1.0)) fail("det_threshold must lie in [0, 1]");
    if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) fail("iou_threshold must lie in [0, 1]");
    if (min_instances < 1) fail("min_instances must be at least 1");
    if (max_miss < 1) fail("max_miss must be at least 1");
    if (!(rho > 0.0 && rho <= 1.0)) fail("rho must lie in (0, 1]");
    if (temporal_window < 0) fail("temporal_window must be non-negative");
    if (!(lambda_pair >= 0.0)) fail("lambda_pair must be non-negative");
    if (!(p_floor > 0.0 && p_floor < 1.0)) fail("p_floor must lie in (0, 1)");
    if (max_sweeps < 0) fail("max_sweeps must be non-negative");
    if (unary_epochs < 1) fail("unary_epochs must be at least 1");
    if (!(unary_lambda > 0.0)) fail("unary_lambda must be positive");
    if (threads < 1) fail("threads must be at least 1");
    if (class_count && *class_count < 2) fail("class_count must be at least 2");
    if (frame_count && *frame_count < 1) fail("frame_count must be at least 1");
  }

  [[nodiscard]] int effective_pair_window() const { return pair_window.value_or(temporal_window); }
};

// clang-format off
#define CTXSEG_CONFIG_FIELDS(X)                                                                  \
  X(k) X(mu) X(tol) X(max_iters) X(prune_eps) X(literal_alg1)                                    \
  X(det_threshold) X(iou_threshold) X(min_instances) X(max_miss) X(rho)                          \
  X(temporal_window) X(include_bg_pairs) X(lambda_pair) X(p_floor) X(max_sweeps) X(no_context)   \
  X(unary_epochs) X(unary_lambda) X(seed) X(threads)
// clang-format on

inline void to_json(nlohmann::json& j, const PipelineConfig& c) {
  j = nlohmann::json::object();
#define CTXSEG_PUT(name) j[#name] = c.name;
  CTXSEG_CONFIG_FIELDS(CTXSEG_PUT)
#undef CTXSEG_PUT
  if (c.class_count) j["class_count"] = *c.class_count;
  if (c.frame_count) j["frame_count"] = *c.frame_count;
  if (c.pair_window) j["pair_window"] = *c.pair_window;
}

// Missing keys keep their current value; unknown keys are rejected.
inline void merge_config(PipelineConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw Error("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
#define CTXSEG_GET(name)                                             \
  if (key == #name) {                                                \
    try {                                                            \
      value.get_to(c.name);                                          \
    } catch (const nlohmann::json::exception&) {                     \
      throw Error("config: key \"" + key + "\" has the wrong type"); \
    }                                                                \
    known = true;                                                    \
  }
    CTXSEG_CONFIG_FIELDS(CTXSEG_GET)
#undef CTXSEG_GET
    if (key == "class_count" || key == "frame_count" || key == "pair_window") {
      auto& slot = key == "class_count" ? c.class_count : key == "frame_count" ? c.frame_count : c.pair_window;
      if (value.is_null())
        slot.reset();
      else if (value.is_number_integer())
        slot = value.get<int>();
      else
        throw Error("config: key \"" + key + "\" has the wrong type");
      known = true;
    }
    if (!known) throw Error("config: unknown key \"" + key + "\"");
  }
}

inline void from_json(const nlohmann::json& j, PipelineConfig& c) {
  c = PipelineConfig{};
  merge_config(c, j);
}

inline PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("config " + path.string() + ": " + e.what());
  }
  merge_config(base, j);
  return base;
}

}  // namespace ctxseg
