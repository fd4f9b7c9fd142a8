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
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ctxseg/common.hpp"
#include "ctxseg/parallel.hpp"
#include "ctxseg/region_store.hpp"
#include "ctxseg/sparse_matrix.hpp"

namespace ctxseg {

// k-NN affinity graph over all regions of a video.
//
// affinity:   symmetric, zero diagonal, entries in (0, 1]
// degrees:    row sums of affinity
// normalized: D^{-1/2} W D^{-1/2}; isolated vertices have empty rows
struct SimilarityGraph {
  int n = 0;
  int k = 0;
  SparseMatrix affinity;
  std::vector<double> degrees;
  SparseMatrix normalized;

  [[nodiscard]] std::size_t edge_count() const noexcept { return affinity.nnz() / 2; }
};

inline SparseMatrix normalized_operator(const SparseMatrix& w) {
  const auto d = w.row_sums();
  std::vector<Triplet> t;
  t.reserve(w.nnz());
  for (int i = 0; i < w.rows(); ++i) {
    const auto cols = w.row_cols(i);
    const auto vals = w.row_values(i);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      const int j = cols[e];
      const double denom = std::sqrt(d[i] * d[j]);
      if (denom > 0.0 && vals[e] != 0.0) t.push_back({i, j, vals[e] / denom});
    }
  }
  return SparseMatrix::from_triplets(w.rows(), w.cols(), std::move(t));
}

inline double inner_product(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Exact k-NN search over the given (normalized) features. ids break ties at
// the k-th rank, smaller id first.
inline SimilarityGraph build_knn_graph(std::span<const std::vector<double>> features, std::span<const RegionId> ids,
                                       int k, int threads = 1) {
  const int n = static_cast<int>(features.size());
  if (ids.size() != features.size()) throw Error("feature and id counts differ");
  if (n < 2) throw Error("k-NN graph needs at least 2 regions, got " + std::to_string(n));
  if (k < 1) throw Error("k must be at least 1, got " + std::to_string(k));
  if (k >= n) {
    warn("k = " + std::to_string(k) + " >= N = " + std::to_string(n) + "; truncated to " + std::to_string(n - 1));
    k = n - 1;
  }

  std::vector<std::vector<Triplet>> per_vertex(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](int i) {
    std::vector<double> score(static_cast<std::size_t>(n), 0.0);
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n - 1));
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      score[j] = std::clamp(inner_product(features[i], features[j]), 0.0, 1.0);
      order.push_back(j);
    }
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](int a, int b) { return score[a] != score[b] ? score[a] > score[b] : ids[a] < ids[b]; });
    auto& out = per_vertex[i];
    for (int r = 0; r < k; ++r) {
      const int j = order[r];
      if (score[j] > 0.0) out.push_back({i, j, score[j]});
    }
  });

  std::vector<Triplet> t;
  for (const auto& list : per_vertex) {
    for (const auto& e : list) {
      t.push_back(e);
      t.push_back({e.col, e.row, e.value});
    }
  }
  SimilarityGraph g;
  g.n = n;
  g.k = k;
  g.affinity = SparseMatrix::from_triplets(n, n, std::move(t), SparseMatrix::Duplicates::kMax);
  g.degrees = g.affinity.row_sums();
  g.normalized = normalized_operator(g.affinity);
  return g;
}

inline SimilarityGraph build_knn_graph(const VideoSequence& seq, int k, int threads = 1) {
  std::vector<std::vector<double>> features;
  std::vector<RegionId> ids;
  features.reserve(static_cast<std::size_t>(seq.size()));
  for (const auto& r : seq.regions()) {
    features.push_back(r.feature);
    ids.push_back(r.id);
  }
  return build_knn_graph(features, ids, k, threads);
}

// Rebuilds a graph from a stored affinity matrix (e.g. a graph dump).
inline SimilarityGraph graph_from_affinity(SparseMatrix affinity, int k = 0) {
  SimilarityGraph g;
  g.n = affinity.rows();
  g.k = k;
  g.affinity = std::move(affinity);
  g.degrees = g.affinity.row_sums();
  g.normalized = normalized_operator(g.affinity);
  return g;
}

}  // namespace ctxseg
