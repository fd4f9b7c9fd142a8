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
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ctxseg/common.hpp"
#include "ctxseg/region_store.hpp"
#include "ctxseg/rng.hpp"

namespace ctxseg {

struct UnaryConfig {
  int epochs = 100;
  double lambda_reg = 1e-3;
  std::uint64_t seed = 0;
};

// One-vs-rest linear max-margin classifiers with softmax calibration.
// weights holds one row of (dim + 1) values per class, the last being the bias.
struct UnaryModel {
  std::vector<ClassId> classes;
  std::size_t dim = 0;
  std::vector<double> weights;

  [[nodiscard]] int label_count() const noexcept { return static_cast<int>(classes.size()); }

  [[nodiscard]] std::vector<double> margins(std::span<const double> feature) const {
    std::vector<double> out(classes.size(), 0.0);
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const double* w = weights.data() + c * (dim + 1);
      double s = w[dim];
      for (std::size_t k = 0; k < dim; ++k) s += w[k] * feature[k];
      out[c] = s;
    }
    return out;
  }

  // Softmax over the class margins.
  [[nodiscard]] std::vector<double> probabilities(std::span<const double> feature) const {
    auto p = margins(feature);
    const double top = *std::max_element(p.begin(), p.end());
    double z = 0.0;
    for (double& v : p) {
      v = std::exp(v - top);
      z += v;
    }
    for (double& v : p) v /= z;
    return p;
  }

  [[nodiscard]] int predict(std::span<const double> feature) const {
    const auto m = margins(feature);
    return static_cast<int>(std::max_element(m.begin(), m.end()) - m.begin());
  }
};

// Trains one hinge-loss classifier per class with Pegasos-style stochastic
// subgradient steps (step 1 / (lambda t), L2 regularization, bias folded in as
// a constant feature). Visiting order is shuffled per epoch from a per-class
// stream of `seed`, so equal inputs give bitwise-equal weights.
inline UnaryModel train_unary(std::span<const std::vector<double>> features, std::span<const ClassId> targets,
                              std::span<const ClassId> classes, const UnaryConfig& cfg = {}) {
  if (features.size() != targets.size()) throw Error("feature and label counts differ");
  if (classes.empty()) throw Error("no classes to train");
  if (cfg.epochs < 1) throw Error("epochs must be at least 1");
  if (!(cfg.lambda_reg > 0.0)) throw Error("lambda_reg must be positive");

  UnaryModel model;
  model.classes.assign(classes.begin(), classes.end());
  model.dim = features.empty() ? 0 : features.front().size();
  for (const auto& f : features) {
    if (f.size() != model.dim) throw Error("training features have inconsistent dimension");
  }
  std::vector<int> target_index(targets.size(), -1);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto it = std::find(classes.begin(), classes.end(), targets[i]);
    if (it == classes.end()) throw Error("training label " + std::to_string(targets[i]) + " is not a model class");
    target_index[i] = static_cast<int>(it - classes.begin());
  }
  std::string missing;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (std::find(target_index.begin(), target_index.end(), static_cast<int>(c)) == target_index.end()) {
      missing += (missing.empty() ? "" : ", ") + std::to_string(classes[c]);
    }
  }
  if (!missing.empty()) throw Error("no training examples for class(es) " + missing);
  if (features.size() > 1 &&
      std::all_of(features.begin(), features.end(), [&](const auto& f) { return f == features.front(); })) {
    warn("all training features are identical; the unary model cannot separate classes");
  }

  const std::size_t stride = model.dim + 1;
  model.weights.assign(classes.size() * stride, 0.0);
  std::vector<std::size_t> order(features.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    Rng rng(stage_seed(cfg.seed, "unary/" + std::to_string(classes[c])));
    double* w = model.weights.data() + c * stride;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::uint64_t t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      rng.shuffle(order.begin(), order.end());
      for (const std::size_t i : order) {
        ++t;
        const double eta = 1.0 / (cfg.lambda_reg * static_cast<double>(t));
        const double y = target_index[i] == static_cast<int>(c) ? 1.0 : -1.0;
        const auto& x = features[i];
        double score = w[model.dim];
        for (std::size_t k = 0; k < model.dim; ++k) score += w[k] * x[k];
        const double shrink = 1.0 - eta * cfg.lambda_reg;
        for (std::size_t k = 0; k < stride; ++k) w[k] *= shrink;
        if (y * score < 1.0) {
          for (std::size_t k = 0; k < model.dim; ++k) w[k] += eta * y * x[k];
          w[model.dim] += eta * y;
        }
      }
    }
  }
  return model;
}

// Trains on the labeled regions of a sequence.
inline UnaryModel train_unary(const VideoSequence& seq, const Labels& labels, std::span<const ClassId> classes,
                              const UnaryConfig& cfg = {}) {
  std::vector<std::vector<double>> features;
  std::vector<ClassId> targets;
  for (const auto& [id, cls] : labels) {
    const auto v = seq.index_of(id);
    if (!v) throw Error("label for unknown region id " + std::to_string(id));
    features.push_back(seq.region(*v).feature);
    targets.push_back(cls);
  }
  return train_unary(features, targets, classes, cfg);
}

// N x L table of -log max(p, p_floor), row-major by vertex.
struct UnaryTable {
  int n = 0;
  int labels = 0;
  std::vector<double> cost;

  [[nodiscard]] double at(int i, int label) const {
    return cost[static_cast<std::size_t>(i) * static_cast<std::size_t>(labels) + static_cast<std::size_t>(label)];
  }
};

inline UnaryTable unary_potentials(const UnaryModel& model, const VideoSequence& seq, double p_floor = 1e-6) {
  if (!(p_floor > 0.0 && p_floor < 1.0)) throw Error("p_floor must lie in (0, 1)");
  UnaryTable t;
  t.n = seq.size();
  t.labels = model.label_count();
  t.cost.reserve(static_cast<std::size_t>(t.n) * static_cast<std::size_t>(t.labels));
  for (const auto& r : seq.regions()) {
    for (const double p : model.probabilities(r.feature)) t.cost.push_back(-std::log(std::max(p, p_floor)));
  }
  return t;
}

}  // namespace ctxseg
