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

// Quadratic pseudo-boolean optimization by roof duality.
//
// Each binary variable p gets two graph nodes, p and its complement p~.
// Node p on the source side means x_p = 0; node p~ on the source side means
// x_p = 1. The doubled energy
//
//   E'(x, y) = E(x) + E(1 - y)              (y stands for 1 - x)
//
// is rewritten so that every pairwise term is submodular: submodular terms
// act on (p, q) and (p~, q~); non-submodular terms on (p, q~) and (p~, q).
// After max-flow, the minimal source side S of the cut labels p with 0 if
// p is in S, with 1 if p~ is in S, and leaves it unlabeled otherwise. Labeled
// variables are persistent: some global minimizer agrees with them, and
// overwriting any complete labeling with them does not increase E.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "ctxseg/common.hpp"
#include "ctxseg/max_flow.hpp"

namespace ctxseg {

inline constexpr int kUnlabeled = -1;

class QpboSolver {
 public:
  explicit QpboSolver(int variables) : n_(variables), unary_(static_cast<std::size_t>(variables), {0.0, 0.0}) {}

  [[nodiscard]] int variable_count() const noexcept { return n_; }

  void add_unary(int p, double e0, double e1) {
    check(p);
    unary_[p][0] += e0;
    unary_[p][1] += e1;
  }

  // Cost e[a][b] for (x_p, x_q) = (a, b).
  void add_pairwise(int p, int q, double e00, double e01, double e10, double e11) {
    check(p);
    check(q);
    if (p == q) throw Error("pairwise term on a single variable");
    pairs_.push_back({p, q, {e00, e01, e10, e11}});
  }

  [[nodiscard]] static bool is_submodular(double e00, double e01, double e10, double e11) noexcept {
    return e00 + e11 <= e01 + e10;
  }

  // Returns 0, 1 or kUnlabeled per variable.
  std::vector<int> solve() {
    const int source = 2 * n_;
    const int sink = 2 * n_ + 1;
    net_.assign(static_cast<std::size_t>(2 * n_), 0.0);
    edges_.clear();
    double scale = 0.0;
    for (int p = 0; p < n_; ++p) {
      const double d = unary_[p][1] - unary_[p][0];
      net_[node(p)] += d;
      net_[comp(p)] -= d;
    }
    for (const auto& t : pairs_) {
      const auto [a, b, c, d] = t.e;
      if (is_submodular(a, b, c, d)) {
        add_submodular(node(t.p), node(t.q), a, b, c, d);
        add_submodular(comp(t.p), comp(t.q), d, c, b, a);
      } else {
        add_submodular(node(t.p), comp(t.q), b, a, d, c);
        add_submodular(comp(t.p), node(t.q), c, d, a, b);
      }
    }
    for (const double v : net_) scale = std::max(scale, std::abs(v));
    for (const auto& e : edges_) scale = std::max(scale, e.cap);

    MaxFlow<double> flow(2 * n_ + 2, 1e-12 * std::max(1.0, scale));
    for (int u = 0; u < 2 * n_; ++u) {
      if (net_[u] > 0.0) flow.add_edge(source, u, net_[u]);
      if (net_[u] < 0.0) flow.add_edge(u, sink, -net_[u]);
    }
    for (const auto& e : edges_) flow.add_edge(e.from, e.to, e.cap);
    flow.solve(source, sink);
    const auto side = flow.source_side();

    std::vector<int> labels(static_cast<std::size_t>(n_), kUnlabeled);
    for (int p = 0; p < n_; ++p) {
      if (side[node(p)] && !side[comp(p)])
        labels[p] = 0;
      else if (side[comp(p)] && !side[node(p)])
        labels[p] = 1;
    }
    return labels;
  }

 private:
  struct Term {
    int p;
    int q;
    std::array<double, 4> e;
  };
  struct Arc {
    int from;
    int to;
    double cap;
  };

  [[nodiscard]] int node(int p) const noexcept { return p; }
  [[nodiscard]] int comp(int p) const noexcept { return n_ + p; }

  void check(int p) const {
    if (p < 0 || p >= n_) throw Error("QPBO variable index out of range");
  }

  // Submodular term over graph nodes u, v (node on the source side = 0):
  //   E = A + (C - A) [u=1] + (D - C) [v=1] + (B + C - A - D) [u=0][v=1]
  void add_submodular(int u, int v, double a, double b, double c, double d) {
    net_[u] += c - a;
    net_[v] += d - c;
    const double k = b + c - a - d;
    if (k > 0.0) edges_.push_back({u, v, k});
  }

  int n_;
  std::vector<std::array<double, 2>> unary_;
  std::vector<Term> pairs_;
  std::vector<double> net_;
  std::vector<Arc> edges_;
};

}  // namespace ctxseg
