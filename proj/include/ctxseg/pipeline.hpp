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

// Stage functions shared by the CLI subcommands and the full pipeline.

#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctxseg/config.hpp"
#include "ctxseg/context_model.hpp"
#include "ctxseg/crf.hpp"
#include "ctxseg/link_propagation.hpp"
#include "ctxseg/region_store.hpp"
#include "ctxseg/similarity_graph.hpp"
#include "ctxseg/trajectory.hpp"
#include "ctxseg/unary.hpp"

namespace ctxseg {

class StageError : public Error {
 public:
  StageError(std::string_view stage, const std::string& what)
      : Error("stage " + std::string(stage) + ": " + what), stage_(stage) {}
  [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

// Runs fn and rethrows any failure tagged with the stage name.
template <typename Fn>
auto run_stage(std::string_view stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

// Frame extent covering every region and detection box.
inline std::pair<double, double> frame_extent(const VideoSequence& seq) {
  double w = 1.0;
  double h = 1.0;
  for (const auto& r : seq.regions()) {
    if (r.bbox) {
      w = std::max(w, r.bbox->right());
      h = std::max(h, r.bbox->bottom());
    }
  }
  for (const auto& d : seq.detections()) {
    w = std::max(w, d.bbox.right());
    h = std::max(h, d.bbox.bottom());
  }
  return {w, h};
}

inline std::vector<TrajectoryHypothesis> stage_tracks(const VideoSequence& seq, const PipelineConfig& cfg) {
  const auto kept = filter_detections(seq, cfg.det_threshold);
  const auto [w, h] = frame_extent(seq);
  ConstantVelocityTracker tracker(w, h);
  return associate_trajectories(kept, tracker, seq.frame_count(), {cfg.iou_threshold, cfg.min_instances, cfg.max_miss});
}

struct ContextStage {
  Annotation annotation;
  ContextExemplarSet exemplars;
  std::vector<ObservedLinkMatrix> links;
};

inline ContextStage stage_context(const VideoSequence& seq, std::span<const TrajectoryHypothesis> hyps,
                                  const PipelineConfig& cfg) {
  ContextStage out;
  out.annotation = annotated_frames(hyps, seq, cfg.rho);
  out.exemplars =
      extract_exemplars(seq, out.annotation.labels, out.annotation.frames, {cfg.temporal_window, cfg.include_bg_pairs});
  out.links = build_observed_links(out.exemplars, seq.size(), seq.class_count());
  return out;
}

inline SimilarityGraph stage_graph(const VideoSequence& seq, const PipelineConfig& cfg) {
  return build_knn_graph(seq, cfg.k, cfg.threads);
}

inline PropagationConfig propagation_config(const PipelineConfig& cfg) {
  PropagationConfig p;
  p.mu = cfg.mu;
  p.tol = cfg.tol;
  p.max_iters = cfg.max_iters;
  p.prune_eps = cfg.prune_eps;
  p.orientation = cfg.literal_alg1 ? PassOrientation::kLiteral : PassOrientation::kSeparable;
  p.threads = cfg.threads;
  return p;
}

inline std::vector<LinkScoreMatrix> stage_propagate(std::span<const ObservedLinkMatrix> links,
                                                    const SimilarityGraph& graph, const PipelineConfig& cfg) {
  return predict_all_links(links, graph.normalized, propagation_config(cfg));
}

struct InferStage {
  CrfProblem problem;
  Labeling labeling;
  Labels predictions;
};

// Label set: classes present among the annotated labels, ascending.
inline std::vector<ClassId> label_set(const Labels& labels) {
  std::set<ClassId> present;
  for (const auto& [id, cls] : labels) present.insert(cls);
  return {present.begin(), present.end()};
}

inline InferStage stage_infer(const VideoSequence& seq, const Labels& labels, std::span<const LinkScoreMatrix> scores,
                              const PipelineConfig& cfg) {
  if (labels.empty()) throw Error("no annotated regions to train the unary model");
  const auto classes = label_set(labels);
  const auto model =
      train_unary(seq, labels, classes, {cfg.unary_epochs, cfg.unary_lambda, stage_seed(cfg.seed, "unary")});
  const auto unary = unary_potentials(model, seq, cfg.p_floor);

  InferStage out;
  auto& p = out.problem;
  p.n = seq.size();
  p.labels = static_cast<int>(classes.size());
  p.unary = unary.cost;
  p.classes = classes;
  p.lambda_pair = cfg.lambda_pair;
  if (!cfg.no_context && !scores.empty()) {
    std::vector<int> frames;
    frames.reserve(static_cast<std::size_t>(seq.size()));
    for (const auto& r : seq.regions()) frames.push_back(r.frame);
    PairwiseOptions opt;
    opt.lambda_pair = cfg.lambda_pair;
    if (cfg.effective_pair_window() >= 0) opt.pair_window = cfg.effective_pair_window();
    opt.vertex_frames = frames;
    p.beta = beta_adaptive(scores);
    p.pairs = build_pairwise(scores, classes, p.beta, opt);
  }
  out.labeling = infer(p, {cfg.max_sweeps});
  for (int v = 0; v < seq.size(); ++v) out.predictions[seq.region(v).id] = classes[out.labeling.labels[v]];
  return out;
}

}  // namespace ctxseg
