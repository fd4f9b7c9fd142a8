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

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctxseg/common.hpp"
#include "ctxseg/region_store.hpp"
#include "ctxseg/sparse_matrix.hpp"

namespace ctxseg {

// Ordered class pair (m, n), linearized as m * L + n.
struct LabelPair {
  ClassId m = 0;
  ClassId n = 0;

  [[nodiscard]] int index(int class_count) const noexcept { return m * class_count + n; }
  static LabelPair from_index(int index, int class_count) noexcept {
    return {index / class_count, index % class_count};
  }

  friend auto operator<=>(const LabelPair&, const LabelPair&) = default;
};

// A labeled ordered vertex pair: region i (class m) supports region j (class n).
struct Exemplar {
  int i = 0;
  int j = 0;
  ClassId m = 0;
  ClassId n = 0;

  friend auto operator<=>(const Exemplar&, const Exemplar&) = default;
};

using ContextExemplarSet = std::vector<Exemplar>;

// Binary N x N link indicator for one ordered class pair.
struct ObservedLinkMatrix {
  LabelPair pair;
  SparseMatrix links;
};

struct ExemplarParams {
  // Maximum frame distance between the two regions of an exemplar.
  int temporal_window = 0;
  bool include_bg_pairs = false;
};

// Ordered pairs of distinct labeled regions from annotated frames at most
// temporal_window frames apart. Labels of regions outside `frames` are ignored.
inline ContextExemplarSet extract_exemplars(const VideoSequence& seq, const Labels& labels, const std::set<int>& frames,
                                            const ExemplarParams& params = {}) {
  if (params.temporal_window < 0) throw Error("temporal_window must be non-negative");
  std::map<int, std::vector<std::pair<int, ClassId>>> by_frame;
  for (const auto& [id, cls] : labels) {
    const auto v = seq.index_of(id);
    if (!v) throw Error("label for unknown region id " + std::to_string(id));
    const int frame = seq.region(*v).frame;
    if (frames.contains(frame)) by_frame[frame].emplace_back(*v, cls);
  }
  for (auto& [f, members] : by_frame) std::sort(members.begin(), members.end());

  ContextExemplarSet out;
  for (const auto& [f, members] : by_frame) {
    for (auto it = by_frame.lower_bound(f - params.temporal_window);
         it != by_frame.end() && it->first <= f + params.temporal_window; ++it) {
      for (const auto& [vi, ci] : members) {
        for (const auto& [vj, cj] : it->second) {
          if (vi == vj) continue;
          if (!params.include_bg_pairs && ci == kBackground && cj == kBackground) continue;
          out.push_back({vi, vj, ci, cj});
        }
      }
    }
  }
  return out;
}

// One matrix per ordered class pair that has any exemplar, sorted by pair.
// Every exemplar (i, j, m, n) also sets its mirror (j, i, n, m).
inline std::vector<ObservedLinkMatrix> build_observed_links(std::span<const Exemplar> exemplars, int n_vertices,
                                                            int class_count) {
  std::map<LabelPair, std::vector<Triplet>> buckets;
  for (const auto& e : exemplars) {
    if (e.i < 0 || e.i >= n_vertices || e.j < 0 || e.j >= n_vertices) {
      throw Error("exemplar vertex outside [0, " + std::to_string(n_vertices) + ")");
    }
    if (e.m < 0 || e.m >= class_count || e.n < 0 || e.n >= class_count) {
      throw Error("exemplar class outside [0, " + std::to_string(class_count) + ")");
    }
    if (e.i == e.j) throw Error("exemplar links a region to itself");
    buckets[{e.m, e.n}].push_back({e.i, e.j, 1.0});
    buckets[{e.n, e.m}].push_back({e.j, e.i, 1.0});
  }
  std::vector<ObservedLinkMatrix> out;
  out.reserve(buckets.size());
  for (auto& [pair, t] : buckets) {
    out.push_back(
        {pair, SparseMatrix::from_triplets(n_vertices, n_vertices, std::move(t), SparseMatrix::Duplicates::kMax)});
  }
  return out;
}

}  // namespace ctxseg
