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

// Per-video inputs: regions with appearance features, detections and
// optional ground truth, read from and written to JSON-lines files.

#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctxseg/common.hpp"

namespace ctxseg {

struct Region {
  RegionId id = 0;
  int frame = 0;
  std::vector<double> feature;
  double area = 0.0;
  std::optional<Box> bbox;
  // Set when the supplied feature was the zero vector.
  bool degenerate = false;
};

struct Detection {
  int frame = 0;
  Box bbox;
  ClassId class_id = 0;
  double confidence = 0.0;
};

struct IngestConfig {
  // Number of frames T; inferred as max frame + 1 when absent.
  std::optional<int> frame_count;
  // Number of classes L including background; inferred from the data when absent.
  std::optional<int> class_count;
};

// Returns true when the vector was all-zero (left untouched).
inline bool normalize_l2(std::span<double> v) {
  double sq = 0.0;
  for (const double x : v) sq += x * x;
  if (sq == 0.0) return true;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
  return false;
}

// Validated, immutable collection of regions and detections for one video.
// Regions are stored sorted by (frame, id); a region's position in that order
// is its vertex index in every matrix built downstream.
class VideoSequence {
 public:
  VideoSequence() = default;

  // Validates, normalizes features and indexes the inputs.
  static VideoSequence build(std::vector<Region> regions, std::vector<Detection> detections,
                             const IngestConfig& config = {}) {
    VideoSequence seq;
    int max_frame = -1;
    ClassId max_class = 0;
    for (const auto& r : regions) max_frame = std::max(max_frame, r.frame);
    for (const auto& d : detections) {
      max_frame = std::max(max_frame, d.frame);
      max_class = std::max(max_class, d.class_id);
    }
    seq.frame_count_ = config.frame_count.value_or(max_frame + 1);
    seq.class_count_ = config.class_count.value_or(max_class + 1);
    if (seq.frame_count_ <= 0) throw Error("sequence has no frames");
    if (seq.class_count_ <= 0) throw Error("class count must be positive");

    std::optional<std::size_t> dim;
    for (auto& r : regions) {
      if (r.id < 0) throw Error("negative region id " + std::to_string(r.id));
      if (r.frame < 0 || r.frame >= seq.frame_count_) {
        throw Error("region " + std::to_string(r.id) + ": frame " + std::to_string(r.frame) + " outside [0, " +
                    std::to_string(seq.frame_count_) + ")");
      }
      if (!(r.area > 0.0)) throw Error("region " + std::to_string(r.id) + ": area must be positive");
      if (r.bbox && !r.bbox->valid()) throw Error("region " + std::to_string(r.id) + ": bbox extents must be positive");
      if (!dim) dim = r.feature.size();
      if (r.feature.size() != *dim) {
        throw Error("region " + std::to_string(r.id) + ": feature dimension " + std::to_string(r.feature.size()) +
                    " differs from " + std::to_string(*dim));
      }
      r.degenerate = normalize_l2(r.feature);
    }
    for (const auto& d : detections) {
      if (d.frame < 0 || d.frame >= seq.frame_count_) {
        throw Error("detection frame " + std::to_string(d.frame) + " outside [0, " + std::to_string(seq.frame_count_) +
                    ")");
      }
      if (!d.bbox.valid()) throw Error("detection bbox extents must be positive");
      if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) throw Error("detection confidence outside [0, 1]");
      if (d.class_id < 0 || d.class_id >= seq.class_count_) {
        throw Error("detection class " + std::to_string(d.class_id) + " outside [0, " +
                    std::to_string(seq.class_count_) + ")");
      }
    }
    seq.dim_ = dim.value_or(0);

    std::stable_sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
      return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
    });
    seq.regions_ = std::move(regions);
    seq.detections_ = std::move(detections);
    for (std::size_t i = 0; i < seq.regions_.size(); ++i) {
      const auto [it, inserted] = seq.index_.emplace(seq.regions_[i].id, static_cast<int>(i));
      if (!inserted) throw Error("duplicate region id " + std::to_string(seq.regions_[i].id));
    }
    seq.frame_begin_.assign(static_cast<std::size_t>(seq.frame_count_) + 1, 0);
    for (const auto& r : seq.regions_) ++seq.frame_begin_[static_cast<std::size_t>(r.frame) + 1];
    for (int f = 0; f < seq.frame_count_; ++f) seq.frame_begin_[f + 1] += seq.frame_begin_[f];
    return seq;
  }

  [[nodiscard]] int frame_count() const noexcept { return frame_count_; }
  [[nodiscard]] int class_count() const noexcept { return class_count_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] int size() const noexcept { return static_cast<int>(regions_.size()); }

  [[nodiscard]] const std::vector<Region>& regions() const noexcept { return regions_; }
  [[nodiscard]] const Region& region(int vertex) const { return regions_.at(static_cast<std::size_t>(vertex)); }
  [[nodiscard]] const std::vector<Detection>& detections() const noexcept { return detections_; }

  // Vertex index of a region id, or nullopt if unknown.
  [[nodiscard]] std::optional<int> index_of(RegionId id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Vertex range [begin, end) of the regions in a frame.
  [[nodiscard]] std::pair<int, int> frame_range(int frame) const {
    return {frame_begin_.at(static_cast<std::size_t>(frame)), frame_begin_.at(static_cast<std::size_t>(frame) + 1)};
  }

 private:
  int frame_count_ = 0;
  int class_count_ = 0;
  std::size_t dim_ = 0;
  std::vector<Region> regions_;
  std::vector<Detection> detections_;
  std::unordered_map<RegionId, int> index_;
  std::vector<int> frame_begin_;
};

using Labels = std::map<RegionId, ClassId>;

// Detections with confidence strictly above the threshold, order preserved.
inline std::vector<Detection> filter_detections(std::span<const Detection> dets, double det_threshold) {
  std::vector<Detection> kept;
  for (const auto& d : dets) {
    if (d.confidence > det_threshold) kept.push_back(d);
  }
  return kept;
}

inline std::vector<Detection> filter_detections(const VideoSequence& seq, double det_threshold) {
  if (!(det_threshold >= 0.0 && det_threshold <= 1.0)) throw Error("detection threshold outside [0, 1]");
  return filter_detections(std::span<const Detection>(seq.detections()), det_threshold);
}

namespace detail {

using json = nlohmann::json;

class LineError : public Error {
 public:
  LineError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what) {}
};

// Calls fn(json, line_number) for each non-blank line.
template <typename Fn>
void for_each_json_line(std::istream& in, const std::string& source, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw LineError(source, lineno, std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) throw LineError(source, lineno, "record is not a JSON object");
    try {
      fn(record, lineno);
    } catch (const LineError&) {
      throw;
    } catch (const json::exception& e) {
      throw LineError(source, lineno, std::string("malformed record: ") + e.what());
    } catch (const Error& e) {
      throw LineError(source, lineno, e.what());
    }
  }
}

inline Box parse_box(const json& j) {
  if (!j.is_array() || j.size() != 4) throw Error("bbox must be [x, y, w, h]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline json box_json(const Box& b) { return json::array({b.x, b.y, b.w, b.h}); }

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace detail

inline std::vector<Region> read_regions(std::istream& in, const std::string& source = "regions") {
  std::vector<Region> regions;
  std::unordered_map<RegionId, std::size_t> first_line;
  std::optional<std::size_t> dim;
  detail::for_each_json_line(in, source, [&](const detail::json& j, std::size_t lineno) {
    Region r;
    r.id = j.at("id").get<RegionId>();
    r.frame = j.at("frame").get<int>();
    r.feature = j.at("feature").get<std::vector<double>>();
    r.area = j.at("area").get<double>();
    if (j.contains("bbox") && !j["bbox"].is_null()) r.bbox = detail::parse_box(j["bbox"]);
    if (!dim) dim = r.feature.size();
    if (r.feature.size() != *dim) {
      throw Error("feature dimension " + std::to_string(r.feature.size()) + " differs from " + std::to_string(*dim));
    }
    if (!(r.area > 0.0)) throw Error("area must be positive");
    if (r.bbox && !r.bbox->valid()) throw Error("bbox extents must be positive");
    const auto [it, inserted] = first_line.emplace(r.id, lineno);
    if (!inserted) {
      throw Error("duplicate region id " + std::to_string(r.id) + " (first seen on line " + std::to_string(it->second) +
                  ")");
    }
    regions.push_back(std::move(r));
  });
  return regions;
}

inline std::vector<Detection> read_detections(std::istream& in, const std::string& source = "detections") {
  std::vector<Detection> dets;
  detail::for_each_json_line(in, source, [&](const detail::json& j, std::size_t) {
    Detection d;
    d.frame = j.at("frame").get<int>();
    d.bbox = detail::parse_box(j.at("bbox"));
    d.class_id = j.at("class").get<ClassId>();
    d.confidence = j.at("confidence").get<double>();
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) throw Error("confidence outside [0, 1]");
    if (!d.bbox.valid()) throw Error("bbox extents must be positive");
    dets.push_back(d);
  });
  return dets;
}

inline VideoSequence load_sequence(std::istream& regions_in, std::istream& detections_in,
                                   const IngestConfig& config = {}) {
  auto regions = read_regions(regions_in);
  auto dets = read_detections(detections_in);
  return VideoSequence::build(std::move(regions), std::move(dets), config);
}

inline VideoSequence load_sequence(const std::filesystem::path& regions_path,
                                   const std::filesystem::path& detections_path, const IngestConfig& config = {}) {
  auto rin = detail::open_input(regions_path);
  auto din = detail::open_input(detections_path);
  auto regions = read_regions(rin, regions_path.string());
  auto dets = read_detections(din, detections_path.string());
  return VideoSequence::build(std::move(regions), std::move(dets), config);
}

// Reads {"id", "class"} lines. Records without "id" (e.g. summary lines of a
// labeling file) are skipped.
inline Labels read_labels(std::istream& in, const std::string& source = "labels") {
  Labels labels;
  detail::for_each_json_line(in, source, [&](const detail::json& j, std::size_t) {
    if (!j.contains("id")) return;
    const auto id = j.at("id").get<RegionId>();
    const auto cls = j.at("class").get<ClassId>();
    if (!labels.emplace(id, cls).second) throw Error("duplicate label for region " + std::to_string(id));
  });
  return labels;
}

inline Labels read_labels(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_labels(in, path.string());
}

inline Labels load_ground_truth(std::istream& in, const VideoSequence& seq,
                                const std::string& source = "ground truth") {
  auto labels = read_labels(in, source);
  for (const auto& [id, cls] : labels) {
    if (!seq.index_of(id)) throw Error(source + ": unknown region id " + std::to_string(id));
    if (cls < 0 || cls >= seq.class_count()) {
      throw Error(source + ": region " + std::to_string(id) + " has class " + std::to_string(cls) + " outside [0, " +
                  std::to_string(seq.class_count()) + ")");
    }
  }
  return labels;
}

inline Labels load_ground_truth(const std::filesystem::path& path, const VideoSequence& seq) {
  auto in = detail::open_input(path);
  return load_ground_truth(in, seq, path.string());
}

inline void write_regions(std::ostream& out, std::span<const Region> regions) {
  for (const auto& r : regions) {
    detail::json j;
    j["id"] = r.id;
    j["frame"] = r.frame;
    j["feature"] = r.feature;
    j["area"] = r.area;
    if (r.bbox) j["bbox"] = detail::box_json(*r.bbox);
    out << j.dump() << '\n';
  }
}

inline void write_detections(std::ostream& out, std::span<const Detection> dets) {
  for (const auto& d : dets) {
    detail::json j;
    j["frame"] = d.frame;
    j["bbox"] = detail::box_json(d.bbox);
    j["class"] = d.class_id;
    j["confidence"] = d.confidence;
    out << j.dump() << '\n';
  }
}

inline void write_labels(std::ostream& out, const Labels& labels) {
  for (const auto& [id, cls] : labels) {
    detail::json j;
    j["id"] = id;
    j["class"] = cls;
    out << j.dump() << '\n';
  }
}

}  // namespace ctxseg
