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

#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>

#include "ctxseg/common.hpp"
#include "ctxseg/region_store.hpp"

namespace ctxseg {

struct ClassTally {
  double intersection = 0.0;
  double union_area = 0.0;
  int predicted_regions = 0;
  int truth_regions = 0;
};

struct EvalReport {
  std::map<ClassId, double> per_class_iou;
  std::map<ClassId, ClassTally> tallies;
  // Mean over non-background classes present in the ground truth.
  double mean_iou = 0.0;
};

// Region-level IoU: each region contributes its pixel area. Only regions with
// a ground-truth label are scored; a missing prediction matches no class.
inline EvalReport iou_per_class(const Labels& pred, const Labels& gt, const VideoSequence& seq) {
  if (gt.empty()) throw Error("ground truth is empty");
  EvalReport report;
  std::set<ClassId> gt_classes;
  for (const auto& [id, truth] : gt) {
    const auto v = seq.index_of(id);
    if (!v) throw Error("ground truth references unknown region id " + std::to_string(id));
    const double area = seq.region(*v).area;
    const auto it = pred.find(id);
    const std::optional<ClassId> guess = it == pred.end() ? std::nullopt : std::optional<ClassId>(it->second);
    if (truth != kBackground) {
      gt_classes.insert(truth);
      auto& t = report.tallies[truth];
      ++t.truth_regions;
      t.union_area += area;
      if (guess == truth) {
        t.intersection += area;
        ++t.predicted_regions;
      }
    }
    if (guess && *guess != kBackground && *guess != truth) {
      auto& t = report.tallies[*guess];
      ++t.predicted_regions;
      t.union_area += area;
    }
  }
  double sum = 0.0;
  for (const auto& [cls, t] : report.tallies) {
    report.per_class_iou[cls] = t.union_area > 0.0 ? t.intersection / t.union_area : 0.0;
  }
  for (const ClassId c : gt_classes) sum += report.per_class_iou[c];
  report.mean_iou = gt_classes.empty() ? 0.0 : sum / static_cast<double>(gt_classes.size());
  return report;
}

inline void print_report(std::ostream& out, const EvalReport& report) {
  char buf[128];
  out << "class      IoU   pred  truth\n";
  for (const auto& [cls, iou] : report.per_class_iou) {
    const auto& t = report.tallies.at(cls);
    std::snprintf(buf, sizeof buf, "%5d  %7.4f  %5d  %5d\n", cls, iou, t.predicted_regions, t.truth_regions);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, " mean  %7.4f\n", report.mean_iou);
  out << buf;
}

}  // namespace ctxseg
