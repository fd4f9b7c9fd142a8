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

// ctxseg command-line driver: one subcommand per pipeline stage plus the
// end-to-end `pipeline` run.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ctxseg.hpp"

namespace {

using namespace ctxseg;
namespace fs = std::filesystem;

// Per-field flags layered over defaults and an optional --config file.
class ConfigFlags {
 public:
  void attach(CLI::App* app) {
    app->add_option("--config", config_path_, "JSON config file (defaults < file < flags)")->check(CLI::ExistingFile);
    field(app, "--k", &PipelineConfig::k, "neighbors per region in the similarity graph");
    field(app, "--mu", &PipelineConfig::mu, "propagation weight of the graph term");
    field(app, "--tol", &PipelineConfig::tol, "propagation stopping tolerance");
    field(app, "--max-iters", &PipelineConfig::max_iters, "propagation iteration cap per pass");
    field(app, "--prune-eps", &PipelineConfig::prune_eps, "scores below this are dropped");
    flag(app, "--literal-alg1", &PipelineConfig::literal_alg1, "run both propagation passes as left multiplications");
    field(app, "--det-threshold", &PipelineConfig::det_threshold, "detections must score strictly above this");
    field(app, "--iou-threshold", &PipelineConfig::iou_threshold, "association IoU threshold (strict)");
    field(app, "--min-instances", &PipelineConfig::min_instances, "detections required per hypothesis");
    field(app, "--max-miss", &PipelineConfig::max_miss, "consecutive tracker-only frames ending a run");
    field(app, "--rho", &PipelineConfig::rho, "box containment fraction for region labels");
    field(app, "--temporal-window", &PipelineConfig::temporal_window, "frame distance of exemplar pairs");
    flag(app, "--include-bg-pairs", &PipelineConfig::include_bg_pairs, "keep background-background exemplars");
    field(app, "--lambda-pair", &PipelineConfig::lambda_pair, "pairwise weight");
    field(app, "--p-floor", &PipelineConfig::p_floor, "probability floor of the unary costs");
    field(app, "--max-sweeps", &PipelineConfig::max_sweeps, "label sweeps of the fusion inference");
    optional_field(app, "--pair-window", &PipelineConfig::pair_window,
                   "frame distance of CRF pairs (default: temporal window, negative: all)");
    flag(app, "--no-context", &PipelineConfig::no_context, "drop the pairwise context terms");
    field(app, "--unary-epochs", &PipelineConfig::unary_epochs, "training epochs of the unary classifier");
    field(app, "--unary-lambda", &PipelineConfig::unary_lambda, "L2 weight of the unary classifier");
    field(app, "--seed", &PipelineConfig::seed, "master seed");
    field(app, "--threads", &PipelineConfig::threads, "worker threads");
    optional_field(app, "--class-count", &PipelineConfig::class_count, "number of classes including background");
    optional_field(app, "--frame-count", &PipelineConfig::frame_count, "number of frames");
  }

  [[nodiscard]] PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config_path_.empty()) cfg = load_config(config_path_, cfg);
    for (const auto& [opt, apply] : appliers_) {
      if (opt->count() > 0) apply(cfg);
    }
    cfg.validate();
    return cfg;
  }

 private:
  template <typename T>
  void field(CLI::App* app, const std::string& name, T PipelineConfig::* member, const std::string& help) {
    auto value = std::make_shared<T>();
    auto* opt = app->add_option(name, *value, help);
    appliers_.emplace_back(opt, [value, member](PipelineConfig& c) { c.*member = *value; });
  }

  void flag(CLI::App* app, const std::string& name, bool PipelineConfig::* member, const std::string& help) {
    auto value = std::make_shared<bool>(false);
    auto* opt = app->add_flag(name, *value, help);
    appliers_.emplace_back(opt, [value, member](PipelineConfig& c) { c.*member = *value; });
  }

  void optional_field(CLI::App* app, const std::string& name, std::optional<int> PipelineConfig::* member,
                      const std::string& help) {
    auto value = std::make_shared<int>(0);
    auto* opt = app->add_option(name, *value, help);
    appliers_.emplace_back(opt, [value, member](PipelineConfig& c) { c.*member = *value; });
  }

  std::string config_path_;
  std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>> appliers_;
};

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  fn(out);
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<ClassId> classes_of(const Labels& labels) {
  std::vector<ClassId> out;
  for (const auto& [id, cls] : labels) out.push_back(cls);
  return out;
}

// Loads regions and optional detections. Without an explicit class count the
// count covers every class seen in the detections and in `extra_classes`.
VideoSequence load_inputs(const std::string& regions_path, const std::string& detections_path,
                          const PipelineConfig& cfg, const std::vector<ClassId>& extra_classes = {}) {
  return run_stage("load", [&] {
    auto rin = detail::open_input(regions_path);
    auto regions = read_regions(rin, regions_path);
    std::vector<Detection> dets;
    if (!detections_path.empty()) {
      auto din = detail::open_input(detections_path);
      dets = read_detections(din, detections_path);
    }
    IngestConfig ingest{cfg.frame_count, cfg.class_count};
    if (!ingest.class_count) {
      ClassId top = 1;
      for (const auto& d : dets) top = std::max(top, d.class_id);
      for (const ClassId c : extra_classes) top = std::max(top, c);
      ingest.class_count = top + 1;
    }
    return VideoSequence::build(std::move(regions), std::move(dets), ingest);
  });
}

Labels load_labels(const std::string& path, const std::string& stage) {
  return run_stage(stage, [&] { return read_labels(fs::path(path)); });
}

std::vector<RegionId> vertex_ids(const VideoSequence& seq) {
  std::vector<RegionId> ids;
  for (const auto& r : seq.regions()) ids.push_back(r.id);
  return ids;
}

void write_annotation(std::ostream& out, const Annotation& a) {
  nlohmann::json j;
  j["frames"] = std::vector<int>(a.frames.begin(), a.frames.end());
  j["labeled_regions"] = a.labels.size();
  j["unlabeled_regions"] = a.unlabeled.size();
  j["skipped_without_bbox"] = a.skipped_without_bbox;
  out << j.dump() << '\n';
}

SynthSpec scenario_spec(const std::string& name, std::uint64_t seed) {
  if (name == "ambiguity") return ambiguity_scenario(seed, true);
  if (name == "ambiguity-without-a") return ambiguity_scenario(seed, false);
  throw Error("unknown scenario \"" + name + "\" (expected ambiguity or ambiguity-without-a)");
}

void write_synth(const fs::path& dir, const SynthData& data) {
  write_file(dir / "regions.jsonl", [&](std::ostream& o) { write_regions(o, data.regions); });
  write_file(dir / "detections.jsonl", [&](std::ostream& o) { write_detections(o, data.detections); });
  write_file(dir / "gt.jsonl", [&](std::ostream& o) { write_labels(o, data.ground_truth); });
}

EvalReport evaluate_and_print(const Labels& pred, const Labels& gt, const VideoSequence& seq) {
  auto report = run_stage("eval", [&] { return iou_per_class(pred, gt, seq); });
  print_report(std::cout, report);
  return report;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context-driven semantic video object segmentation"};
  app.require_subcommand(1);

  std::string regions, detections, gt, out, hypotheses, graph_path, links_path, labels_path, scores_path, pred_path;
  std::string scenario, spec_path;

  auto* synth = app.add_subcommand("synth", "write a synthetic dataset (regions, detections, ground truth)");
  auto* tracks = app.add_subcommand("tracks", "detections -> trajectory hypotheses");
  auto* graph = app.add_subcommand("graph", "regions -> similarity graph");
  auto* context = app.add_subcommand("context", "hypotheses + regions -> labels and observed links");
  auto* propagate = app.add_subcommand("propagate", "observed links + graph -> link scores");
  auto* infer_cmd = app.add_subcommand("infer", "link scores + regions -> labeling");
  auto* eval = app.add_subcommand("eval", "labeling + ground truth -> IoU report");
  auto* pipeline = app.add_subcommand("pipeline", "run every stage");

  std::vector<ConfigFlags> flags(8);
  CLI::App* subs[] = {synth, tracks, graph, context, propagate, infer_cmd, eval, pipeline};
  for (std::size_t i = 0; i < 8; ++i) flags[i].attach(subs[i]);

  synth->add_option("--scenario", scenario, "canned scenario: ambiguity, ambiguity-without-a");
  synth->add_option("--spec", spec_path, "synthetic spec JSON")->check(CLI::ExistingFile);
  synth->add_option("--out", out, "output directory")->required();

  tracks->add_option("--regions", regions)->required();
  tracks->add_option("--detections", detections)->required();
  tracks->add_option("--out", out, "hypotheses JSONL")->required();

  graph->add_option("--regions", regions)->required();
  graph->add_option("--out", out, "graph JSON")->required();

  context->add_option("--regions", regions)->required();
  context->add_option("--detections", detections);
  context->add_option("--hypotheses", hypotheses)->required();
  context->add_option("--out", out, "output directory")->required();

  propagate->add_option("--links", links_path)->required();
  propagate->add_option("--graph", graph_path)->required();
  propagate->add_option("--out", out, "scores JSONL")->required();

  infer_cmd->add_option("--regions", regions)->required();
  infer_cmd->add_option("--labels", labels_path, "annotated labels from `context`")->required();
  infer_cmd->add_option("--scores", scores_path)->required();
  infer_cmd->add_option("--out", out, "labeling JSONL")->required();

  eval->add_option("--regions", regions)->required();
  eval->add_option("--pred", pred_path)->required();
  eval->add_option("--gt", gt)->required();
  eval->add_option("--out", out, "report JSON");

  pipeline->add_option("--scenario", scenario, "synthesize this scenario into --out first");
  pipeline->add_option("--regions", regions);
  pipeline->add_option("--detections", detections);
  pipeline->add_option("--gt", gt);
  pipeline->add_option("--out", out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const std::size_t which =
        static_cast<std::size_t>(std::find(std::begin(subs), std::end(subs), app.get_subcommands().front()) - subs);
    const PipelineConfig cfg = run_stage("config", [&] { return flags[which].resolve(); });

    if (synth->parsed()) {
      run_stage("synth", [&] {
        if (scenario.empty() == spec_path.empty()) throw Error("give exactly one of --scenario or --spec");
        SynthSpec spec;
        if (!scenario.empty()) {
          spec = scenario_spec(scenario, cfg.seed);
        } else {
          std::ifstream in(spec_path);
          spec = nlohmann::json::parse(in).get<SynthSpec>();
          if (synth->count("--seed") > 0) spec.seed = cfg.seed;
        }
        write_synth(out, generate(spec));
      });
    } else if (tracks->parsed()) {
      const auto seq = load_inputs(regions, detections, cfg);
      const auto hyps = run_stage("tracks", [&] { return stage_tracks(seq, cfg); });
      write_file(out, [&](std::ostream& o) { write_hypotheses(o, hyps); });
    } else if (graph->parsed()) {
      const auto seq = load_inputs(regions, "", cfg);
      const auto g = run_stage("graph", [&] { return stage_graph(seq, cfg); });
      write_file(out, [&](std::ostream& o) { write_graph(o, g, vertex_ids(seq)); });
    } else if (context->parsed()) {
      auto hin = run_stage("load", [&] { return detail::open_input(hypotheses); });
      const auto hyps = run_stage("load", [&] { return read_hypotheses(hin, hypotheses); });
      std::vector<ClassId> hyp_classes;
      for (const auto& h : hyps) hyp_classes.push_back(h.class_id);
      const auto seq = load_inputs(regions, detections, cfg, hyp_classes);
      const auto ctx = run_stage("context", [&] { return stage_context(seq, hyps, cfg); });
      write_file(fs::path(out) / "labels.jsonl", [&](std::ostream& o) { write_labels(o, ctx.annotation.labels); });
      write_file(fs::path(out) / "links.jsonl", [&](std::ostream& o) { write_links(o, ctx.links); });
      write_file(fs::path(out) / "annotation.json", [&](std::ostream& o) { write_annotation(o, ctx.annotation); });
    } else if (propagate->parsed()) {
      auto gin = run_stage("load", [&] { return detail::open_input(graph_path); });
      const auto g = run_stage("load", [&] { return read_graph(gin, graph_path); });
      auto lin = run_stage("load", [&] { return detail::open_input(links_path); });
      const auto links = run_stage("load", [&] { return read_links(lin, g.n, links_path); });
      const auto scores = run_stage("propagate", [&] { return stage_propagate(links, g, cfg); });
      write_file(out, [&](std::ostream& o) { write_scores(o, scores); });
    } else if (infer_cmd->parsed()) {
      const auto labels = load_labels(labels_path, "load");
      const auto seq = load_inputs(regions, "", cfg, classes_of(labels));
      auto sin = run_stage("load", [&] { return detail::open_input(scores_path); });
      const auto scores = run_stage("load", [&] { return read_scores(sin, seq.size(), scores_path); });
      const auto result = run_stage("infer", [&] { return stage_infer(seq, labels, scores, cfg); });
      write_file(out, [&](std::ostream& o) {
        write_labeling(o, result.predictions, result.labeling.energy, result.labeling.sweeps);
      });
    } else if (eval->parsed()) {
      const auto pred = load_labels(pred_path, "load");
      const auto truth_raw = load_labels(gt, "load");
      const auto seq = load_inputs(regions, "", cfg, classes_of(truth_raw));
      const auto truth = run_stage("load", [&] { return load_ground_truth(fs::path(gt), seq); });
      const auto report = evaluate_and_print(pred, truth, seq);
      if (!out.empty()) write_file(out, [&](std::ostream& o) { o << report_json(report).dump(2) << '\n'; });
    } else if (pipeline->parsed()) {
      const fs::path dir = out;
      if (!scenario.empty()) {
        if (!regions.empty() || !detections.empty())
          throw StageError("synth", "--scenario excludes --regions/--detections");
        run_stage("synth", [&] { write_synth(dir, generate(scenario_spec(scenario, cfg.seed))); });
        regions = (dir / "regions.jsonl").string();
        detections = (dir / "detections.jsonl").string();
        gt = (dir / "gt.jsonl").string();
      }
      if (regions.empty() || detections.empty())
        throw StageError("load", "pipeline needs --regions and --detections or --scenario");
      write_file(dir / "config.json", [&](std::ostream& o) { o << nlohmann::json(cfg).dump(2) << '\n'; });
      std::vector<ClassId> gt_classes;
      if (!gt.empty()) gt_classes = classes_of(load_labels(gt, "load"));
      const auto seq = load_inputs(regions, detections, cfg, gt_classes);

      const auto hyps = run_stage("tracks", [&] { return stage_tracks(seq, cfg); });
      write_file(dir / "hypotheses.jsonl", [&](std::ostream& o) { write_hypotheses(o, hyps); });
      const auto ctx = run_stage("context", [&] { return stage_context(seq, hyps, cfg); });
      write_file(dir / "labels.jsonl", [&](std::ostream& o) { write_labels(o, ctx.annotation.labels); });
      write_file(dir / "links.jsonl", [&](std::ostream& o) { write_links(o, ctx.links); });
      write_file(dir / "annotation.json", [&](std::ostream& o) { write_annotation(o, ctx.annotation); });

      std::vector<LinkScoreMatrix> scores;
      if (!cfg.no_context) {
        const auto g = run_stage("graph", [&] { return stage_graph(seq, cfg); });
        write_file(dir / "graph.json", [&](std::ostream& o) { write_graph(o, g, vertex_ids(seq)); });
        scores = run_stage("propagate", [&] { return stage_propagate(ctx.links, g, cfg); });
      }
      write_file(dir / "scores.jsonl", [&](std::ostream& o) { write_scores(o, scores); });
      const auto result = run_stage("infer", [&] { return stage_infer(seq, ctx.annotation.labels, scores, cfg); });
      write_file(dir / "labeling.jsonl", [&](std::ostream& o) {
        write_labeling(o, result.predictions, result.labeling.energy, result.labeling.sweeps);
      });
      if (!gt.empty()) {
        const auto truth = run_stage("load", [&] { return load_ground_truth(fs::path(gt), seq); });
        const auto report = evaluate_and_print(result.predictions, truth, seq);
        write_file(dir / "report.json", [&](std::ostream& o) { o << report_json(report).dump(2) << '\n'; });
      }
    }
  } catch (const StageError& e) {
    std::cerr << "ctxseg: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ctxseg: stage output: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
