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
#include <limits>
#include <queue>
#include <type_traits>
#include <vector>

#include "ctxseg/common.hpp"

namespace ctxseg {

// Dinic's blocking-flow max-flow. Residual capacities at or below `epsilon`
// count as saturated, which keeps floating-point capacities well-behaved.
template <typename Cap>
class MaxFlow {
 public:
  static_assert(std::is_arithmetic_v<Cap>);

  explicit MaxFlow(int nodes, Cap epsilon = Cap{}) : adj_(static_cast<std::size_t>(nodes)), epsilon_(epsilon) {}

  [[nodiscard]] int node_count() const noexcept { return static_cast<int>(adj_.size()); }

  // Adds u -> v with capacity `cap` and v -> u with `reverse_cap`.
  void add_edge(int u, int v, Cap cap, Cap reverse_cap = Cap{}) {
    if (u < 0 || v < 0 || u >= node_count() || v >= node_count()) throw Error("max-flow edge endpoint out of range");
    if (cap < Cap{} || reverse_cap < Cap{}) throw Error("max-flow capacities must be non-negative");
    if (u == v) return;
    adj_[u].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({v, cap});
    adj_[v].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({u, reverse_cap});
  }

  Cap solve(int source, int sink) {
    source_ = source;
    Cap total{};
    level_.assign(adj_.size(), -1);
    next_.assign(adj_.size(), 0);
    while (build_levels(source, sink)) {
      std::fill(next_.begin(), next_.end(), 0);
      while (true) {
        const Cap pushed = augment(source, sink, std::numeric_limits<Cap>::max());
        if (!(pushed > epsilon_)) break;
        total += pushed;
      }
    }
    return total;
  }

  // Nodes reachable from the source in the residual graph after solve(): the
  // minimal source side of a minimum cut.
  [[nodiscard]] std::vector<char> source_side() const {
    std::vector<char> seen(adj_.size(), 0);
    std::vector<int> stack{source_};
    seen[source_] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (const int e : adj_[u]) {
        const int v = edges_[e].to;
        if (!seen[v] && edges_[e].residual > epsilon_) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    return seen;
  }

 private:
  struct Edge {
    int to;
    Cap residual;
  };

  bool build_levels(int source, int sink) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[source] = 0;
    q.push(source);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (const int e : adj_[u]) {
        const int v = edges_[e].to;
        if (level_[v] < 0 && edges_[e].residual > epsilon_) {
          level_[v] = level_[u] + 1;
          q.push(v);
        }
      }
    }
    return level_[sink] >= 0;
  }

  Cap augment(int u, int sink, Cap limit) {
    if (u == sink) return limit;
    for (auto& i = next_[u]; i < static_cast<int>(adj_[u].size()); ++i) {
      const int e = adj_[u][i];
      Edge& edge = edges_[e];
      if (!(edge.residual > epsilon_) || level_[edge.to] != level_[u] + 1) continue;
      const Cap pushed = augment(edge.to, sink, std::min(limit, edge.residual));
      if (pushed > epsilon_) {
        edge.residual -= pushed;
        edges_[e ^ 1].residual += pushed;
        return pushed;
      }
    }
    return Cap{};
  }

  std::vector<std::vector<int>> adj_;
  std::vector<Edge> edges_;
  std::vector<int> level_;
  std::vector<int> next_;
  Cap epsilon_;
  int source_ = 0;
};

}  // namespace ctxseg
