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

// Dump formats for intermediate artifacts. Vertex indices refer to the
// (frame, id) order of the loaded sequence.

#pragma once

#include <istream>
#include <json.hpp>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ctxseg/context_model.hpp"
#include "ctxseg/crf.hpp"
#include "ctxseg/evaluation.hpp"
#include "ctxseg/link_propagation.hpp"
#include "ctxseg/region_store.hpp"
#include "ctxseg/similarity_graph.hpp"
#include "ctxseg/trajectory.hpp"

namespace ctxseg {

// {"n", "k", "ids", "edges": [[i, j, w], ...]} with i < j, sorted.
inline void write_graph(std::ostream& out, const SimilarityGraph& g, std::span<const RegionId> ids) {
  nlohmann::json j;
  j["n"] = g.n;
  j["k"] = g.k;
  j["ids"] = std::vector<RegionId>(ids.begin(), ids.end());
  auto edges = nlohmann::json::array();
  for (int i = 0; i < g.affinity.rows(); ++i) {
    const auto cols = g.affinity.row_cols(i);
    const auto vals = g.affinity.row_values(i);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      if (cols[e] > i) edges.push_back(nlohmann::json::array({i, cols[e], vals[e]}));
    }
  }
  j["edges"] = std::move(edges);
  out << j.dump() << '\n';
}

inline SimilarityGraph read_graph(std::istream& in, const std::string& source = "graph") {
  nlohmann::json j;
  try {
    in >> j;
    const int n = j.at("n").get<int>();
    std::vector<Triplet> t;
    for (const auto& e : j.at("edges")) {
      const int a = e.at(0).get<int>();
      const int b = e.at(1).get<int>();
      const double w = e.at(2).get<double>();
      t.push_back({a, b, w});
      t.push_back({b, a, w});
    }
    return graph_from_affinity(SparseMatrix::from_triplets(n, n, std::move(t), SparseMatrix::Duplicates::kMax),
                               j.value("k", 0));
  } catch (const nlohmann::json::exception& e) {
    throw Error(source + ": " + e.what());
  }
}

namespace detail {

inline const char* source_tag(EntrySource s) { return s == EntrySource::kDetection ? "det" : "trk"; }

inline nlohmann::json matrix_entries(const SparseMatrix& m, bool with_values) {
  auto arr = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    const auto cols = m.row_cols(r);
    const auto vals = m.row_values(r);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      if (with_values)
        arr.push_back(nlohmann::json::array({r, cols[e], vals[e]}));
      else
        arr.push_back(nlohmann::json::array({r, cols[e]}));
    }
  }
  return arr;
}

}  // namespace detail

// One line per hypothesis: {"class", "seed_confidence", "entries": [{"frame", "bbox", "source"}]}.
inline void write_hypotheses(std::ostream& out, std::span<const TrajectoryHypothesis> hyps) {
  for (const auto& h : hyps) {
    nlohmann::json j;
    j["class"] = h.class_id;
    j["seed_confidence"] = h.seed_confidence;
    auto entries = nlohmann::json::array();
    for (const auto& e : h.entries) {
      entries.push_back(
          {{"frame", e.frame}, {"bbox", detail::box_json(e.bbox)}, {"source", detail::source_tag(e.source)}});
    }
    j["entries"] = std::move(entries);
    out << j.dump() << '\n';
  }
}

inline std::vector<TrajectoryHypothesis> read_hypotheses(std::istream& in, const std::string& source = "hypotheses") {
  std::vector<TrajectoryHypothesis> hyps;
  detail::for_each_json_line(in, source, [&](const detail::json& j, std::size_t) {
    TrajectoryHypothesis h;
    h.class_id = j.at("class").get<ClassId>();
    h.seed_confidence = j.value("seed_confidence", 0.0);
    for (const auto& e : j.at("entries")) {
      const auto tag = e.at("source").get<std::string>();
      if (tag != "det" && tag != "trk") throw Error("entry source must be \"det\" or \"trk\"");
      h.entries.push_back({e.at("frame").get<int>(), detail::parse_box(e.at("bbox")),
                           tag == "det" ? EntrySource::kDetection : EntrySource::kTracker});
    }
    hyps.push_back(std::move(h));
  });
  return hyps;
}

// One line per class pair: {"m", "n", "links": [[i, j], ...]}.
inline void write_links(std::ostream& out, std::span<const ObservedLinkMatrix> links) {
  for (const auto& o : links) {
    nlohmann::json j;
    j["m"] = o.pair.m;
    j["n"] = o.pair.n;
    j["links"] = detail::matrix_entries(o.links, false);
    out << j.dump() << '\n';
  }
}

inline std::vector<ObservedLinkMatrix> read_links(std::istream& in, int n_vertices,
                                                  const std::string& source = "links") {
  std::vector<ObservedLinkMatrix> out;
  detail::for_each_json_line(in, source, [&](const detail::json& j, std::size_t) {
    std::vector<Triplet> t;
    for (const auto& e : j.at("links")) t.push_back({e.at(0).get<int>(), e.at(1).get<int>(), 1.0});
    out.push_back({{j.at("m").get<ClassId>(), j.at("n").get<ClassId>()},
                   SparseMatrix::from_triplets(n_vertices, n_vertices, std::move(t), SparseMatrix::Duplicates::kMax)});
  });
  return out;
}

// One line per class pair: {"m", "n", "converged", "scores": [[i, j, s], ...]}.
inline void write_scores(std::ostream& out, std::span<const LinkScoreMatrix> scores) {
  for (const auto& s : scores) {
    nlohmann::json j;
    j["m"] = s.pair.m;
    j["n"] = s.pair.n;
    j["converged"] = s.converged;
    j["scores"] = detail::matrix_entries(s.scores, true);
    out << j.dump() << '\n';
  }
}

inline std::vector<LinkScoreMatrix> read_scores(std::istream& in, int n_vertices,
                                                const std::string& source = "scores") {
  std::vector<LinkScoreMatrix> out;
  detail::for_each_json_line(in, source, [&](const detail::json& j, std::size_t) {
    std::vector<Triplet> t;
    for (const auto& e : j.at("scores")) t.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
    LinkScoreMatrix s;
    s.pair = {j.at("m").get<ClassId>(), j.at("n").get<ClassId>()};
    s.converged = j.value("converged", true);
    s.scores = SparseMatrix::from_triplets(n_vertices, n_vertices, std::move(t), SparseMatrix::Duplicates::kLast);
    out.push_back(std::move(s));
  });
  return out;
}

// Label lines followed by one {"energy", "sweeps"} summary line.
inline void write_labeling(std::ostream& out, const Labels& labels, double energy, int sweeps) {
  write_labels(out, labels);
  out << nlohmann::json{{"energy", energy}, {"sweeps", sweeps}}.dump() << '\n';
}

// {"per_class": {"<class>": iou, ...}, "mean": m}
inline nlohmann::json report_json(const EvalReport& r) {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [cls, iou] : r.per_class_iou) per[std::to_string(cls)] = iou;
  return {{"per_class", per}, {"mean", r.mean_iou}};
}

}  // namespace ctxseg
