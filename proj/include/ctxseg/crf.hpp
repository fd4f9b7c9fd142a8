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

// Region labeling CRF. The energy is
//
//   E(x) = sum_i psi_i(x_i) + sum_{i<j} phi_ij(x_i, x_j)
//
// with phi_ij(m, n) = lambda * (exp(-S(i, m, j, n)^2 / (2 beta)) - 1), S the
// predicted link score and beta the mean squared score. Pairs without any
// score would carry a constant table and are not instantiated.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctxseg/common.hpp"
#include "ctxseg/link_propagation.hpp"
#include "ctxseg/qpbo.hpp"
#include "ctxseg/unary.hpp"

namespace ctxseg {

// Cost table for an unordered vertex pair i < j; table[a * L + b] is the
// cost of (x_i, x_j) = (a, b).
struct PairTerm {
  int i = 0;
  int j = 0;
  std::vector<double> table;
};

struct CrfProblem {
  int n = 0;
  int labels = 0;
  std::vector<double> unary;  // n x labels
  std::vector<PairTerm> pairs;
  double beta = 1.0;
  double lambda_pair = 1.0;
  // Class id of each label index.
  std::vector<ClassId> classes;

  [[nodiscard]] double unary_at(int i, int label) const {
    return unary[static_cast<std::size_t>(i) * static_cast<std::size_t>(labels) + static_cast<std::size_t>(label)];
  }
};

struct Labeling {
  std::vector<int> labels;  // label index per vertex
  double energy = 0.0;
  int sweeps = 0;
  // Energy after the initial labeling and after every fusion move.
  std::vector<double> trace;
};

inline void check_problem(const CrfProblem& p) {
  if (p.n < 0 || p.labels < 1) throw Error("CRF problem needs at least one label");
  if (p.unary.size() != static_cast<std::size_t>(p.n) * static_cast<std::size_t>(p.labels)) {
    throw Error("unary table has the wrong size");
  }
  const auto table_size = static_cast<std::size_t>(p.labels) * static_cast<std::size_t>(p.labels);
  for (const auto& t : p.pairs) {
    if (t.i < 0 || t.j >= p.n || t.i >= t.j) throw Error("pair term must satisfy 0 <= i < j < n");
    if (t.table.size() != table_size) throw Error("pair table has the wrong size");
  }
}

inline double energy(const CrfProblem& problem, std::span<const int> x) {
  if (x.size() != static_cast<std::size_t>(problem.n)) throw Error("labeling size differs from problem size");
  double e = 0.0;
  for (int i = 0; i < problem.n; ++i) e += problem.unary_at(i, x[i]);
  const auto l = static_cast<std::size_t>(problem.labels);
  for (const auto& t : problem.pairs)
    e += t.table[static_cast<std::size_t>(x[t.i]) * l + static_cast<std::size_t>(x[t.j])];
  return e;
}

// Mean squared score over all stored entries; 1 when there are none.
inline double beta_adaptive(std::span<const LinkScoreMatrix> scores) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : scores) {
    for (int r = 0; r < s.scores.rows(); ++r) {
      for (const double v : s.scores.row_values(r)) {
        sum += v * v;
        ++count;
      }
    }
  }
  if (count == 0 || sum == 0.0) return 1.0;
  return sum / static_cast<double>(count);
}

struct PairwiseOptions {
  double lambda_pair = 1.0;
  // Subtract the no-link cost so absent links cost 0. Off gives the
  // unshifted exp(-S^2 / 2 beta) tables.
  bool shifted = true;
  // When set, only pairs whose frames differ by at most pair_window are
  // instantiated. Requires vertex_frames.
  std::optional<int> pair_window;
  std::span<const int> vertex_frames;
};

// Pair tables for every vertex pair i < j with a nonzero score S(i, m, j, n)
// for some class pair. `classes` maps label index to class id; scores of
// classes outside it are ignored.
inline std::vector<PairTerm> build_pairwise(std::span<const LinkScoreMatrix> scores, std::span<const ClassId> classes,
                                            double beta, const PairwiseOptions& opt = {}) {
  if (!(beta > 0.0)) throw Error("beta must be positive");
  if (opt.pair_window && opt.vertex_frames.empty()) throw Error("pair_window needs vertex frames");
  const int labels = static_cast<int>(classes.size());
  const auto l = static_cast<std::size_t>(labels);
  auto label_of = [&](ClassId c) -> int {
    const auto it = std::find(classes.begin(), classes.end(), c);
    return it == classes.end() ? -1 : static_cast<int>(it - classes.begin());
  };

  std::map<std::pair<int, int>, std::vector<double>> raw;
  for (const auto& s : scores) {
    const int a = label_of(s.pair.m);
    const int b = label_of(s.pair.n);
    if (a < 0 || b < 0) continue;
    for (int i = 0; i < s.scores.rows(); ++i) {
      const auto cols = s.scores.row_cols(i);
      const auto vals = s.scores.row_values(i);
      for (std::size_t e = 0; e < cols.size(); ++e) {
        const int j = cols[e];
        if (j <= i || vals[e] == 0.0) continue;
        if (opt.pair_window && std::abs(opt.vertex_frames[i] - opt.vertex_frames[j]) > *opt.pair_window) continue;
        auto& table = raw[{i, j}];
        if (table.empty()) table.assign(l * l, 0.0);
        table[static_cast<std::size_t>(a) * l + static_cast<std::size_t>(b)] = vals[e];
      }
    }
  }

  std::vector<PairTerm> out;
  out.reserve(raw.size());
  const double shift = opt.shifted ? 1.0 : 0.0;
  for (auto& [key, table] : raw) {
    for (double& v : table) v = opt.lambda_pair * (std::exp(-v * v / (2.0 * beta)) - shift);
    out.push_back({key.first, key.second, std::move(table)});
  }
  return out;
}

// One fusion move: each variable keeps current[i] or takes proposal[i],
// decided by QPBO. Variables QPBO leaves unlabeled keep current[i].
inline Labeling qpbo_fuse(const CrfProblem& problem, std::span<const int> current, std::span<const int> proposal) {
  const auto n = static_cast<std::size_t>(problem.n);
  if (current.size() != n || proposal.size() != n) throw Error("labeling size differs from problem size");
  std::vector<int> var(n, -1);
  int free = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (current[i] != proposal[i]) var[i] = free++;
  }
  Labeling out;
  out.labels.assign(current.begin(), current.end());
  if (free == 0) {
    out.energy = energy(problem, out.labels);
    return out;
  }

  const auto l = static_cast<std::size_t>(problem.labels);
  auto cell = [&](const PairTerm& t, int a, int b) {
    return t.table[static_cast<std::size_t>(a) * l + static_cast<std::size_t>(b)];
  };
  QpboSolver solver(free);
  for (std::size_t i = 0; i < n; ++i) {
    if (var[i] < 0) continue;
    const int p = static_cast<int>(i);
    solver.add_unary(var[i], problem.unary_at(p, current[i]), problem.unary_at(p, proposal[i]));
  }
  for (const auto& t : problem.pairs) {
    const int vi = var[t.i];
    const int vj = var[t.j];
    const int ci = current[t.i], pi = proposal[t.i];
    const int cj = current[t.j], pj = proposal[t.j];
    if (vi >= 0 && vj >= 0) {
      solver.add_pairwise(vi, vj, cell(t, ci, cj), cell(t, ci, pj), cell(t, pi, cj), cell(t, pi, pj));
    } else if (vi >= 0) {
      solver.add_unary(vi, cell(t, ci, cj), cell(t, pi, cj));
    } else if (vj >= 0) {
      solver.add_unary(vj, cell(t, ci, cj), cell(t, ci, pj));
    }
  }
  const auto z = solver.solve();
  for (std::size_t i = 0; i < n; ++i) {
    if (var[i] >= 0 && z[var[i]] == 1) out.labels[i] = proposal[i];
  }
  out.energy = energy(problem, out.labels);
  return out;
}

struct InferConfig {
  int max_sweeps = 10;
};

// Starts from the per-vertex unary argmin, then sweeps alpha over all labels,
// fusing the constant-alpha labeling each time (alpha-expansion as fusion).
// Stops after a sweep without energy decrease or after max_sweeps.
inline Labeling infer(const CrfProblem& problem, const InferConfig& cfg = {}) {
  check_problem(problem);
  if (cfg.max_sweeps < 0) throw Error("max_sweeps must be non-negative");
  Labeling cur;
  cur.labels.resize(static_cast<std::size_t>(problem.n));
  for (int i = 0; i < problem.n; ++i) {
    int best = 0;
    for (int a = 1; a < problem.labels; ++a) {
      if (problem.unary_at(i, a) < problem.unary_at(i, best)) best = a;
    }
    cur.labels[i] = best;
  }
  cur.energy = energy(problem, cur.labels);
  cur.trace.push_back(cur.energy);
  if (problem.pairs.empty()) return cur;

  std::vector<int> proposal(static_cast<std::size_t>(problem.n));
  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    const double start = cur.energy;
    for (int alpha = 0; alpha < problem.labels; ++alpha) {
      std::fill(proposal.begin(), proposal.end(), alpha);
      auto next = qpbo_fuse(problem, cur.labels, proposal);
      cur.trace.push_back(next.energy);
      if (next.energy <= cur.energy) {
        cur.labels = std::move(next.labels);
        cur.energy = next.energy;
      }
    }
    cur.sweeps = sweep + 1;
    if (!(cur.energy < start - 1e-12 * std::max(1.0, std::abs(start)))) break;
  }
  return cur;
}

// Exact minimizer by enumeration in lexicographic order; the first labeling
// reaching the minimum wins.
inline Labeling brute_force_oracle(const CrfProblem& problem, double max_labelings = 1e7) {
  check_problem(problem);
  if (std::pow(static_cast<double>(problem.labels), problem.n) > max_labelings) {
    throw Error("brute force over " + std::to_string(problem.labels) + "^" + std::to_string(problem.n) +
                " labelings exceeds the limit");
  }
  std::vector<int> x(static_cast<std::size_t>(problem.n), 0);
  Labeling best;
  best.energy = std::numeric_limits<double>::infinity();
  while (true) {
    const double e = energy(problem, x);
    if (e < best.energy) {
      best.energy = e;
      best.labels = x;
    }
    int pos = problem.n - 1;
    while (pos >= 0 && ++x[pos] == problem.labels) x[pos--] = 0;
    if (pos < 0) break;
  }
  best.trace.push_back(best.energy);
  return best;
}

}  // namespace ctxseg
