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

// Link prediction by two label-propagation passes over the similarity graph.
//
// For an observed link matrix O and normalized operator L, the row pass
// propagates every nonzero row of O over the graph,
//
//   P_r(t+1) = mu * P_r(t) * L + (1 - mu) * O,
//
// and the column pass propagates the columns of its result,
//
//   P_c(t+1) = mu * L * P_c(t) + (1 - mu) * P_r,
//
// both from zero. The fixed point is
//
//   P = (1 - mu)^2 (I - mu L)^{-1} O (I - mu L)^{-1},
//
// so scores are never formed over the N^2 x N^2 pair graph. The literal
// orientation runs both passes as left multiplications instead, with fixed
// point (1 - mu)^2 (I - mu L)^{-2} O.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ctxseg/common.hpp"
#include "ctxseg/context_model.hpp"
#include "ctxseg/parallel.hpp"
#include "ctxseg/sparse_matrix.hpp"

namespace ctxseg {

enum class PassOrientation {
  kSeparable,  // row pass multiplies from the right, column pass from the left
  kLiteral,    // both passes multiply from the left
};

struct PropagationConfig {
  double mu = 0.99;
  double tol = 1e-6;
  int max_iters = 1000;
  double prune_eps = 1e-8;
  PassOrientation orientation = PassOrientation::kSeparable;
  int threads = 1;

  void validate() const {
    if (!(mu > 0.0 && mu < 1.0)) throw Error("mu must lie in (0, 1), got " + std::to_string(mu));
    if (!(tol > 0.0)) throw Error("tol must be positive");
    if (max_iters < 1) throw Error("max_iters must be at least 1");
    if (!(prune_eps >= 0.0)) throw Error("prune_eps must be non-negative");
  }
};

struct PassResult {
  SparseMatrix values;
  bool converged = true;
  int iterations = 0;
};

struct LinkScoreMatrix {
  LabelPair pair;
  SparseMatrix scores;
  bool converged = true;
  int row_iterations = 0;
  int column_iterations = 0;
};

namespace detail {

struct BlockIteration {
  std::vector<double> block;  // rows x n, row-major
  bool converged = false;
  int iterations = 0;
};

// Iterates X(t+1) = mu * X(t) * op + (1 - mu) * S for a block of sparse
// source rows, from X = 0, in lockstep. Stops once
// max|X(t+1) - X(t)| * change_scale < tol.
inline BlockIteration iterate_block(const std::vector<std::vector<std::pair<int, double>>>& sources,
                                    const SparseMatrix& op, const PropagationConfig& cfg, double change_scale) {
  const int rows = static_cast<int>(sources.size());
  const int n = op.rows();
  const auto width = static_cast<std::size_t>(n);
  BlockIteration it;
  it.block.assign(static_cast<std::size_t>(rows) * width, 0.0);
  if (rows == 0) {
    it.converged = true;
    return it;
  }
  std::vector<double> next(it.block.size(), 0.0);
  std::vector<double> row_change(static_cast<std::size_t>(rows), 0.0);
  const double keep = 1.0 - cfg.mu;
  for (int t = 1; t <= cfg.max_iters; ++t) {
    parallel_for(rows, cfg.threads, [&](int r) {
      const double* cur = it.block.data() + static_cast<std::size_t>(r) * width;
      double* out = next.data() + static_cast<std::size_t>(r) * width;
      std::fill(out, out + width, 0.0);
      for (int k = 0; k < n; ++k) {
        const double v = cur[k];
        if (v == 0.0) continue;
        const auto cols = op.row_cols(k);
        const auto vals = op.row_values(k);
        for (std::size_t e = 0; e < cols.size(); ++e) out[cols[e]] += v * vals[e];
      }
      for (std::size_t j = 0; j < width; ++j) out[j] *= cfg.mu;
      for (const auto& [c, s] : sources[r]) out[c] += keep * s;
      double change = 0.0;
      for (std::size_t j = 0; j < width; ++j) change = std::max(change, std::abs(out[j] - cur[j]));
      row_change[r] = change;
    });
    std::swap(it.block, next);
    it.iterations = t;
    const double change = *std::max_element(row_change.begin(), row_change.end());
    if (change * change_scale < cfg.tol) {
      it.converged = true;
      break;
    }
  }
  return it;
}

inline std::vector<std::pair<int, double>> row_entries(const SparseMatrix& m, int r) {
  std::vector<std::pair<int, double>> out;
  const auto cols = m.row_cols(r);
  const auto vals = m.row_values(r);
  out.reserve(cols.size());
  for (std::size_t e = 0; e < cols.size(); ++e) out.emplace_back(cols[e], vals[e]);
  return out;
}

inline bool keep_score(double v, double prune_eps) { return v > 0.0 && v >= prune_eps; }

// X = fixed point of X <- mu * X * op + (1 - mu) * S, row by row.
inline PassResult right_pass(const SparseMatrix& source, const SparseMatrix& op, const PropagationConfig& cfg) {
  std::vector<int> active;
  std::vector<std::vector<std::pair<int, double>>> sources;
  for (int r = 0; r < source.rows(); ++r) {
    if (source.row_nnz(r) == 0) continue;
    active.push_back(r);
    sources.push_back(row_entries(source, r));
  }
  const auto it = iterate_block(sources, op, cfg, 1.0);
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(source.rows()));
  const auto width = static_cast<std::size_t>(op.rows());
  for (std::size_t a = 0; a < active.size(); ++a) {
    const double* x = it.block.data() + a * width;
    auto& row = rows[active[a]];
    for (std::size_t j = 0; j < width; ++j) {
      if (keep_score(x[j], cfg.prune_eps)) row.emplace_back(static_cast<int>(j), x[j]);
    }
  }
  return {SparseMatrix::from_rows(source.rows(), op.cols(), rows), it.converged, it.iterations};
}

// X = fixed point of X <- mu * op * X + (1 - mu) * S.
//
// Factored through the active rows A of S: X(t) = G(t) S_A where the columns
// of G(t) diffuse the unit vectors e_a, a in A. The iterate sequence is the
// same as iterating X directly; the stopping test bounds the change of X by
// max|dG| times the largest column sum of |S_A|.
inline PassResult left_pass(const SparseMatrix& source, const SparseMatrix& op, const PropagationConfig& cfg) {
  const int n = source.rows();
  std::vector<int> active;
  std::vector<std::vector<std::pair<int, double>>> units;
  std::vector<double> col_sum(static_cast<std::size_t>(source.cols()), 0.0);
  for (int r = 0; r < n; ++r) {
    if (source.row_nnz(r) == 0) continue;
    active.push_back(r);
    units.push_back({{r, 1.0}});
    const auto cols = source.row_cols(r);
    const auto vals = source.row_values(r);
    for (std::size_t e = 0; e < cols.size(); ++e) col_sum[cols[e]] += std::abs(vals[e]);
  }
  const double scale = col_sum.empty() ? 1.0 : std::max(1.0, *std::max_element(col_sum.begin(), col_sum.end()));
  // Rows of G^T diffuse through op^T.
  const auto it = iterate_block(units, op.transpose(), cfg, scale);

  const auto width = static_cast<std::size_t>(op.rows());
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(n));
  parallel_for(n, cfg.threads, [&](int i) {
    std::vector<double> acc(static_cast<std::size_t>(source.cols()), 0.0);
    bool any = false;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const double g = it.block[a * width + static_cast<std::size_t>(i)];
      if (g == 0.0) continue;
      any = true;
      const auto cols = source.row_cols(active[a]);
      const auto vals = source.row_values(active[a]);
      for (std::size_t e = 0; e < cols.size(); ++e) acc[cols[e]] += g * vals[e];
    }
    if (!any) return;
    auto& row = rows[i];
    for (std::size_t j = 0; j < acc.size(); ++j) {
      if (keep_score(acc[j], cfg.prune_eps)) row.emplace_back(static_cast<int>(j), acc[j]);
    }
  });
  return {SparseMatrix::from_rows(n, source.cols(), rows), it.converged, it.iterations};
}

inline void check_shapes(const SparseMatrix& source, const SparseMatrix& op) {
  if (op.rows() != op.cols()) throw Error("propagation operator must be square");
  if (source.rows() != op.rows() || source.cols() != op.rows()) {
    throw Error("link matrix is " + std::to_string(source.rows()) + "x" + std::to_string(source.cols()) +
                " but the graph has " + std::to_string(op.rows()) + " vertices");
  }
}

}  // namespace detail

// Row-wise pass. Only rows of O with a nonzero entry are propagated; the
// remaining rows stay zero.
inline PassResult propagate_row_pass(const SparseMatrix& observed, const SparseMatrix& op,
                                     const PropagationConfig& cfg = {}) {
  cfg.validate();
  detail::check_shapes(observed, op);
  if (cfg.orientation == PassOrientation::kLiteral) return detail::left_pass(observed, op, cfg);
  return detail::right_pass(observed, op, cfg);
}

inline PassResult propagate_column_pass(const SparseMatrix& row_scores, const SparseMatrix& op,
                                        const PropagationConfig& cfg = {}) {
  cfg.validate();
  detail::check_shapes(row_scores, op);
  return detail::left_pass(row_scores, op, cfg);
}

// Scores for every class pair with a nonzero observed matrix. Pairs are
// processed concurrently when cfg.threads > 1; results do not depend on the
// thread count.
inline std::vector<LinkScoreMatrix> predict_all_links(std::span<const ObservedLinkMatrix> observed,
                                                      const SparseMatrix& op, const PropagationConfig& cfg = {}) {
  cfg.validate();
  std::vector<const ObservedLinkMatrix*> work;
  for (const auto& o : observed) {
    detail::check_shapes(o.links, op);
    if (!o.links.empty()) work.push_back(&o);
  }
  std::vector<LinkScoreMatrix> out(work.size());
  PropagationConfig inner = cfg;
  inner.threads = 1;
  parallel_for(static_cast<int>(work.size()), cfg.threads, [&](int w) {
    const auto& o = *work[w];
    auto row = propagate_row_pass(o.links, op, inner);
    auto col = propagate_column_pass(row.values, op, inner);
    out[w] = {o.pair, std::move(col.values), row.converged && col.converged, row.iterations, col.iterations};
  });
  for (const auto& s : out) {
    if (!s.converged) {
      warn("propagation for class pair (" + std::to_string(s.pair.m) + ", " + std::to_string(s.pair.n) +
           ") did not converge within " + std::to_string(cfg.max_iters) + " iterations");
    }
  }
  return out;
}

}  // namespace ctxseg
