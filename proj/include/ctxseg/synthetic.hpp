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

// Seeded synthetic videos: scripted objects per frame, unit-sphere class
// appearance with angular noise, and noisy detections.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "ctxseg/common.hpp"
#include "ctxseg/region_store.hpp"
#include "ctxseg/rng.hpp"

namespace ctxseg {

struct SynthObject {
  ClassId class_id = 1;
  Box box;
  int regions = 2;
  bool detectable = true;
  // Appearance direction overriding the class mean (ground truth stays class_id).
  std::optional<std::vector<double>> appearance;
};

struct SynthFrame {
  std::vector<SynthObject> objects;
  // Overrides DetectionModel::miss_rate for this frame; 1 suppresses detections.
  std::optional<double> miss_rate;
};

struct DetectionModel {
  double miss_rate = 0.0;
  double confidence_mean = 0.9;
  double confidence_noise = 0.05;
  // Box jitter as a fraction of the box size.
  double box_jitter = 0.02;
};

struct SynthSpec {
  std::uint64_t seed = 0;
  int dim = 16;
  // Angular noise scale of region features around their appearance direction.
  double sigma = 0.1;
  // Mean appearance direction per class id; entry 0 is background.
  std::vector<std::vector<double>> class_means;
  std::vector<SynthFrame> frames;
  int background_regions = 4;
  double frame_width = 320.0;
  double frame_height = 240.0;
  Box background_size{0.0, 0.0, 40.0, 30.0};
  DetectionModel detection;
};

struct SynthData {
  std::vector<Region> regions;
  std::vector<Detection> detections;
  Labels ground_truth;
  int frame_count = 0;
  int class_count = 0;

  [[nodiscard]] VideoSequence sequence() const {
    return VideoSequence::build(regions, detections, {frame_count, class_count});
  }
};

inline void validate(const SynthSpec& spec) {
  if (spec.dim < 1) throw Error("synthetic feature dimension must be positive");
  if (!(spec.sigma >= 0.0)) throw Error("angular noise sigma must be non-negative");
  if (!(spec.detection.miss_rate >= 0.0 && spec.detection.miss_rate < 1.0)) throw Error("miss rate must lie in [0, 1)");
  if (spec.frames.empty()) throw Error("synthetic script has no frames");
  if (spec.class_means.empty()) throw Error("synthetic spec defines no classes");
  for (const auto& m : spec.class_means) {
    if (m.size() != static_cast<std::size_t>(spec.dim)) throw Error("class mean dimension differs from dim");
  }
  for (std::size_t a = 0; a < spec.class_means.size(); ++a) {
    for (std::size_t b = a + 1; b < spec.class_means.size(); ++b) {
      if (spec.class_means[a] == spec.class_means[b]) {
        throw Error("class means " + std::to_string(a) + " and " + std::to_string(b) + " coincide");
      }
    }
  }
  for (std::size_t f = 0; f < spec.frames.size(); ++f) {
    const auto& fr = spec.frames[f];
    if (fr.miss_rate && !(*fr.miss_rate >= 0.0 && *fr.miss_rate <= 1.0)) throw Error("frame miss rate outside [0, 1]");
    for (const auto& o : fr.objects) {
      if (o.class_id <= kBackground || o.class_id >= static_cast<ClassId>(spec.class_means.size())) {
        throw Error("frame " + std::to_string(f) + " references undefined class " + std::to_string(o.class_id));
      }
      if (!o.box.valid() || o.regions < 1) throw Error("frame " + std::to_string(f) + " has an empty object");
      if (o.appearance && o.appearance->size() != static_cast<std::size_t>(spec.dim)) {
        throw Error("object appearance dimension differs from dim");
      }
    }
  }
}

inline SynthData generate(const SynthSpec& spec) {
  validate(spec);
  Rng rng(stage_seed(spec.seed, "synth"));
  SynthData data;
  data.frame_count = static_cast<int>(spec.frames.size());
  data.class_count = static_cast<int>(spec.class_means.size());

  const double noise = spec.sigma / std::sqrt(static_cast<double>(spec.dim));
  auto sample_feature = [&](const std::vector<double>& mean) {
    std::vector<double> f = mean;
    normalize_l2(f);
    for (double& v : f) v += noise * rng.normal();
    normalize_l2(f);
    return f;
  };

  RegionId next_id = 0;
  for (int frame = 0; frame < data.frame_count; ++frame) {
    const auto& script = spec.frames[frame];
    for (const auto& obj : script.objects) {
      const auto& mean = obj.appearance ? *obj.appearance : spec.class_means[obj.class_id];
      const double strip = obj.box.w / obj.regions;
      for (int s = 0; s < obj.regions; ++s) {
        Region r;
        r.id = next_id++;
        r.frame = frame;
        r.bbox = Box{obj.box.x + s * strip, obj.box.y, strip, obj.box.h};
        r.area = r.bbox->area();
        r.feature = sample_feature(mean);
        data.ground_truth[r.id] = obj.class_id;
        data.regions.push_back(std::move(r));
      }
    }
    for (int b = 0; b < spec.background_regions; ++b) {
      Box box = spec.background_size;
      for (int attempt = 0; attempt < 64; ++attempt) {
        box.x = rng.uniform(0.0, std::max(0.0, spec.frame_width - box.w));
        box.y = rng.uniform(0.0, std::max(0.0, spec.frame_height - box.h));
        const bool clear = std::none_of(script.objects.begin(), script.objects.end(),
                                        [&](const SynthObject& o) { return intersection_area(box, o.box) > 0.0; });
        if (clear) break;
      }
      Region r;
      r.id = next_id++;
      r.frame = frame;
      r.bbox = box;
      r.area = box.area();
      r.feature = sample_feature(spec.class_means[kBackground]);
      data.ground_truth[r.id] = kBackground;
      data.regions.push_back(std::move(r));
    }
    const double miss = script.miss_rate.value_or(spec.detection.miss_rate);
    for (const auto& obj : script.objects) {
      if (!obj.detectable) continue;
      if (rng.uniform() < miss) continue;
      const double j = spec.detection.box_jitter;
      Box box = obj.box;
      box.x += rng.normal(0.0, j * obj.box.w);
      box.y += rng.normal(0.0, j * obj.box.h);
      box.w = std::max(1.0, box.w * (1.0 + rng.normal(0.0, j)));
      box.h = std::max(1.0, box.h * (1.0 + rng.normal(0.0, j)));
      const double conf =
          std::clamp(rng.normal(spec.detection.confidence_mean, spec.detection.confidence_noise), 0.0, 1.0);
      data.detections.push_back({frame, box, obj.class_id, conf});
    }
  }
  return data;
}

// Class ids used by the ambiguity scenario.
struct AmbiguityClasses {
  static constexpr ClassId kA = 1;
  static constexpr ClassId kB = 2;
  static constexpr ClassId kC = 3;
};

// Canned scenario for context disambiguation. Classes B and C are confusers
// (a small angular gap). Frames 0-9 show A next to B, frames 10-19 show C
// alone; all of these are detected. Frames 20-29 carry no detections and
// show an object of class B whose appearance sits halfway between B and C,
// next to an A unless `with_context_object` is false.
inline SynthSpec ambiguity_scenario(std::uint64_t seed = 7, bool with_context_object = true) {
  SynthSpec spec;
  spec.seed = seed;
  spec.dim = 16;
  spec.sigma = 0.3;
  auto axis = [&](int k) {
    std::vector<double> v(static_cast<std::size_t>(spec.dim), 0.0);
    v[static_cast<std::size_t>(k)] = 1.0;
    return v;
  };
  const double gap = 0.6;
  std::vector<double> c_mean = axis(2);
  c_mean[2] = std::cos(gap);
  c_mean[3] = std::sin(gap);
  std::vector<double> ambiguous(static_cast<std::size_t>(spec.dim), 0.0);
  ambiguous[2] = 1.0 + std::cos(gap);
  ambiguous[3] = std::sin(gap);
  normalize_l2(ambiguous);
  spec.class_means = {axis(0), axis(1), axis(2), c_mean};

  const Box left{30.0, 30.0, 60.0, 80.0};
  const Box right{150.0, 30.0, 60.0, 80.0};
  spec.frames.resize(30);
  for (int f = 0; f < 30; ++f) {
    auto& fr = spec.frames[f];
    const double drift = 0.5 * f;
    Box l = left;
    Box r = right;
    l.x += drift;
    r.x += drift;
    if (f < 10) {
      fr.objects.push_back({AmbiguityClasses::kA, l, 2, true, std::nullopt});
      fr.objects.push_back({AmbiguityClasses::kB, r, 2, true, std::nullopt});
    } else if (f < 20) {
      fr.objects.push_back({AmbiguityClasses::kC, r, 2, true, std::nullopt});
    } else {
      if (with_context_object) fr.objects.push_back({AmbiguityClasses::kA, l, 2, false, std::nullopt});
      fr.objects.push_back({AmbiguityClasses::kB, r, 2, false, ambiguous});
      fr.miss_rate = 1.0;
    }
  }
  return spec;
}

// JSON form of a spec, for `synth --spec`.
inline void to_json(nlohmann::json& j, const SynthSpec& s) {
  j = nlohmann::json::object();
  j["seed"] = s.seed;
  j["dim"] = s.dim;
  j["sigma"] = s.sigma;
  j["class_means"] = s.class_means;
  j["background_regions"] = s.background_regions;
  j["frame_width"] = s.frame_width;
  j["frame_height"] = s.frame_height;
  j["background_size"] = {s.background_size.w, s.background_size.h};
  j["detection"] = {{"miss_rate", s.detection.miss_rate},
                    {"confidence_mean", s.detection.confidence_mean},
                    {"confidence_noise", s.detection.confidence_noise},
                    {"box_jitter", s.detection.box_jitter}};
  auto frames = nlohmann::json::array();
  for (const auto& f : s.frames) {
    nlohmann::json jf;
    auto objs = nlohmann::json::array();
    for (const auto& o : f.objects) {
      nlohmann::json jo = {{"class", o.class_id},
                           {"bbox", {o.box.x, o.box.y, o.box.w, o.box.h}},
                           {"regions", o.regions},
                           {"detectable", o.detectable}};
      if (o.appearance) jo["appearance"] = *o.appearance;
      objs.push_back(jo);
    }
    jf["objects"] = objs;
    if (f.miss_rate) jf["miss_rate"] = *f.miss_rate;
    frames.push_back(jf);
  }
  j["frames"] = frames;
}

inline void from_json(const nlohmann::json& j, SynthSpec& s) {
  s = SynthSpec{};
  s.seed = j.value("seed", s.seed);
  s.dim = j.value("dim", s.dim);
  s.sigma = j.value("sigma", s.sigma);
  s.class_means = j.at("class_means").get<std::vector<std::vector<double>>>();
  s.background_regions = j.value("background_regions", s.background_regions);
  s.frame_width = j.value("frame_width", s.frame_width);
  s.frame_height = j.value("frame_height", s.frame_height);
  if (j.contains("background_size")) {
    s.background_size.w = j["background_size"].at(0).get<double>();
    s.background_size.h = j["background_size"].at(1).get<double>();
  }
  if (j.contains("detection")) {
    const auto& d = j["detection"];
    s.detection.miss_rate = d.value("miss_rate", s.detection.miss_rate);
    s.detection.confidence_mean = d.value("confidence_mean", s.detection.confidence_mean);
    s.detection.confidence_noise = d.value("confidence_noise", s.detection.confidence_noise);
    s.detection.box_jitter = d.value("box_jitter", s.detection.box_jitter);
  }
  for (const auto& jf : j.at("frames")) {
    SynthFrame f;
    if (jf.contains("miss_rate")) f.miss_rate = jf["miss_rate"].get<double>();
    for (const auto& jo : jf.value("objects", nlohmann::json::array())) {
      SynthObject o;
      o.class_id = jo.at("class").get<ClassId>();
      const auto& b = jo.at("bbox");
      o.box = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()};
      o.regions = jo.value("regions", o.regions);
      o.detectable = jo.value("detectable", o.detectable);
      if (jo.contains("appearance")) o.appearance = jo["appearance"].get<std::vector<double>>();
      f.objects.push_back(std::move(o));
    }
    s.frames.push_back(std::move(f));
  }
}

}  // namespace ctxseg
