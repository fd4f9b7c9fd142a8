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

// Trajectory hypotheses: detections are chained over time by a tracker,
// greedily in order of detection confidence. Frames covered by a retained
// hypothesis become the annotated frames used for context exemplars.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ctxseg/common.hpp"
#include "ctxseg/region_store.hpp"

namespace ctxseg {

[[nodiscard]] inline double iou_box(const Box& a, const Box& b) noexcept {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

// Single-object tracker seam. start() seeds a run in one temporal direction
// (+1 forward, -1 backward); predict() is then called once per visited frame
// in that direction; update() re-seeds at the box accepted for the frame
// just predicted.
class Tracker {
 public:
  virtual ~Tracker() = default;
  virtual void start(int frame, const Box& box, int direction) = 0;
  virtual Box predict(int frame) = 0;
  virtual void update(int frame, const Box& box) = 0;
};

// Constant-velocity box predictor. Velocity comes from the last two accepted
// boxes (zero until there are two); the size of the last accepted box is held.
class ConstantVelocityTracker final : public Tracker {
 public:
  ConstantVelocityTracker() = default;
  ConstantVelocityTracker(double frame_width, double frame_height) : width_(frame_width), height_(frame_height) {}

  void start(int frame, const Box& box, int /*direction*/) override {
    last_ = box;
    last_frame_ = frame;
    has_prev_ = false;
  }

  Box predict(int frame) override {
    Box b = last_;
    if (has_prev_ && last_frame_ != prev_frame_) {
      const double dt = static_cast<double>(frame - last_frame_) / static_cast<double>(last_frame_ - prev_frame_);
      b.x += (last_.x - prev_.x) * dt;
      b.y += (last_.y - prev_.y) * dt;
    }
    return clip(b);
  }

  void update(int frame, const Box& box) override {
    prev_ = last_;
    prev_frame_ = last_frame_;
    has_prev_ = true;
    last_ = box;
    last_frame_ = frame;
  }

  // Clamp to the frame bounds, keeping at least a 1x1 box.
  [[nodiscard]] Box clip(Box b) const {
    if (std::isfinite(width_)) {
      const double x0 = std::clamp(b.x, 0.0, std::max(0.0, width_ - 1.0));
      const double x1 = std::min(b.right(), width_);
      b.x = x0;
      b.w = std::max(1.0, x1 - x0);
    }
    if (std::isfinite(height_)) {
      const double y0 = std::clamp(b.y, 0.0, std::max(0.0, height_ - 1.0));
      const double y1 = std::min(b.bottom(), height_);
      b.y = y0;
      b.h = std::max(1.0, y1 - y0);
    }
    b.w = std::max(1.0, b.w);
    b.h = std::max(1.0, b.h);
    return b;
  }

 private:
  double width_ = std::numeric_limits<double>::infinity();
  double height_ = std::numeric_limits<double>::infinity();
  Box last_;
  Box prev_;
  int last_frame_ = 0;
  int prev_frame_ = 0;
  bool has_prev_ = false;
};

inline std::unique_ptr<Tracker> default_tracker(double frame_width = std::numeric_limits<double>::infinity(),
                                                double frame_height = std::numeric_limits<double>::infinity()) {
  return std::make_unique<ConstantVelocityTracker>(frame_width, frame_height);
}

enum class EntrySource { kDetection, kTracker };

struct TrajectoryEntry {
  int frame = 0;
  Box bbox;
  EntrySource source = EntrySource::kDetection;
};

struct TrajectoryHypothesis {
  ClassId class_id = 0;
  double seed_confidence = 0.0;
  std::vector<TrajectoryEntry> entries;  // sorted by frame, one per frame

  [[nodiscard]] int instance_count() const {
    return static_cast<int>(std::count_if(
        entries.begin(), entries.end(), [](const TrajectoryEntry& e) { return e.source == EntrySource::kDetection; }));
  }
};

struct AssociationParams {
  double iou_threshold = 0.5;
  int min_instances = 3;
  int max_miss = 5;
};

// Greedy confidence-ranked association. Every detection is consumed by at most
// one attempted hypothesis; those of discarded attempts are not returned to
// the pool. Each run stops after max_miss consecutive tracker-only frames or
// at the video boundary; the trailing tracker-only entries of a run are
// dropped, so every hypothesis starts and ends on a detection.
inline std::vector<TrajectoryHypothesis> associate_trajectories(std::span<const Detection> dets, Tracker& tracker,
                                                                int frame_count, const AssociationParams& params = {}) {
  if (params.max_miss < 1) throw Error("max_miss must be at least 1");
  std::vector<TrajectoryHypothesis> out;
  if (dets.empty()) return out;
  for (const auto& d : dets) frame_count = std::max(frame_count, d.frame + 1);

  // Pool in seed order: confidence desc, then frame, then x, then input order.
  std::vector<int> ranked(dets.size());
  std::iota(ranked.begin(), ranked.end(), 0);
  std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    const auto& da = dets[a];
    const auto& db = dets[b];
    if (da.confidence != db.confidence) return da.confidence > db.confidence;
    if (da.frame != db.frame) return da.frame < db.frame;
    return da.bbox.x < db.bbox.x;
  });
  std::vector<std::vector<int>> by_frame(static_cast<std::size_t>(frame_count));
  for (const int i : ranked) by_frame[dets[i].frame].push_back(i);
  std::vector<char> alive(dets.size(), 1);

  for (const int seed : ranked) {
    if (!alive[seed]) continue;
    alive[seed] = 0;
    const Detection& s = dets[seed];
    TrajectoryHypothesis hyp;
    hyp.class_id = s.class_id;
    hyp.seed_confidence = s.confidence;
    std::vector<TrajectoryEntry> backward;
    std::vector<TrajectoryEntry> forward;

    for (const int dir : {+1, -1}) {
      auto& run = dir > 0 ? forward : backward;
      tracker.start(s.frame, s.bbox, dir);
      int misses = 0;
      for (int f = s.frame + dir; f >= 0 && f < frame_count; f += dir) {
        const Box pred = tracker.predict(f);
        int best = -1;
        double best_iou = params.iou_threshold;
        for (const int c : by_frame[f]) {
          if (!alive[c] || dets[c].class_id != s.class_id) continue;
          const double iou = iou_box(pred, dets[c].bbox);
          // Candidates are visited in seed order, so equal IoU keeps the
          // higher-confidence detection.
          if (iou > best_iou) {
            best = c;
            best_iou = iou;
          }
        }
        if (best >= 0) {
          alive[best] = 0;
          run.push_back({f, dets[best].bbox, EntrySource::kDetection});
          tracker.update(f, dets[best].bbox);
          misses = 0;
        } else {
          run.push_back({f, pred, EntrySource::kTracker});
          if (++misses >= params.max_miss) break;
        }
      }
      while (!run.empty() && run.back().source == EntrySource::kTracker) run.pop_back();
    }

    hyp.entries.reserve(backward.size() + forward.size() + 1);
    hyp.entries.assign(backward.rbegin(), backward.rend());
    hyp.entries.push_back({s.frame, s.bbox, EntrySource::kDetection});
    hyp.entries.insert(hyp.entries.end(), forward.begin(), forward.end());
    if (hyp.instance_count() >= params.min_instances) out.push_back(std::move(hyp));
  }
  return out;
}

struct Annotation {
  std::set<int> frames;             // annotated frames
  Labels labels;                    // hypothesis classes and background, annotated frames only
  std::vector<RegionId> unlabeled;  // regions outside the annotated frames
  int skipped_without_bbox = 0;
};

// Labels the regions of annotated frames. A region takes class c when at
// least `rho` of its box area lies inside a box of some class-c hypothesis in
// its frame; competing hypotheses resolve toward the higher seed confidence,
// then the smaller class. Unmatched regions are background.
inline Annotation annotated_frames(std::span<const TrajectoryHypothesis> hyps, const VideoSequence& seq,
                                   double rho = 0.5) {
  Annotation ann;
  struct Cover {
    Box box;
    ClassId cls;
    double seed_confidence;
  };
  std::vector<std::vector<Cover>> covers(static_cast<std::size_t>(seq.frame_count()));
  for (const auto& h : hyps) {
    for (const auto& e : h.entries) {
      if (e.frame < 0 || e.frame >= seq.frame_count()) {
        throw Error("hypothesis entry frame " + std::to_string(e.frame) + " outside the sequence");
      }
      ann.frames.insert(e.frame);
      covers[e.frame].push_back({e.bbox, h.class_id, h.seed_confidence});
    }
  }
  for (const auto& r : seq.regions()) {
    if (!ann.frames.contains(r.frame)) {
      ann.unlabeled.push_back(r.id);
      continue;
    }
    if (!r.bbox) {
      ++ann.skipped_without_bbox;
      warn("region " + std::to_string(r.id) + " in annotated frame " + std::to_string(r.frame) +
           " has no bbox; left unlabeled");
      continue;
    }
    const Cover* chosen = nullptr;
    for (const auto& c : covers[r.frame]) {
      const double frac = intersection_area(*r.bbox, c.box) / r.bbox->area();
      if (frac < rho) continue;
      if (!chosen || c.seed_confidence > chosen->seed_confidence ||
          (c.seed_confidence == chosen->seed_confidence && c.cls < chosen->cls)) {
        chosen = &c;
      }
    }
    ann.labels[r.id] = chosen ? chosen->cls : kBackground;
  }
  return ann;
}

}  // namespace ctxseg
