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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"

namespace ctxseg {
namespace {

using testing::closed_form_links;
using testing::closed_form_row_pass;
using testing::Dense;
using testing::to_eigen;

PropagationConfig tight(double mu) {
  PropagationConfig cfg;
  cfg.mu = mu;
  cfg.tol = 1e-12;
  cfg.max_iters = 100000;
  cfg.prune_eps = 0.0;
  return cfg;
}

SparseMatrix path3() {
  // Path 0 - 1 - 2 with unit weights.
  const auto w = SparseMatrix::from_triplets(3, 3, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}});
  return normalized_operator(w);
}

double max_abs_diff(const SparseMatrix& a, const Dense& b) { return (to_eigen(a) - b).cwiseAbs().maxCoeff(); }

TEST(RowPass, ZeroObservedGivesZero) {
  const auto r = propagate_row_pass(SparseMatrix(3, 3), path3(), tight(0.5));
  EXPECT_TRUE(r.values.empty());
  EXPECT_TRUE(r.converged);
}

TEST(RowPass, EmptyGraphScalesObserved) {
  const auto o = SparseMatrix::from_triplets(3, 3, {{0, 2, 1.0}});
  const auto r = propagate_row_pass(o, SparseMatrix(3, 3), tight(0.9));
  EXPECT_NEAR(r.values.at(0, 2), 0.1, 1e-15);
  EXPECT_EQ(r.values.nnz(), 1U);
}

TEST(RowPass, PathGraphMatchesDenseSolve) {
  const auto l = path3();
  const auto o = SparseMatrix::from_triplets(3, 3, {{0, 2, 1.0}});
  const auto r = propagate_row_pass(o, l, tight(0.5));
  EXPECT_LT(max_abs_diff(r.values, closed_form_row_pass(to_eigen(l), to_eigen(o), 0.5)), 1e-6);
  // Rows of O without entries stay empty.
  EXPECT_EQ(r.values.row_nnz(1), 0U);
  EXPECT_EQ(r.values.row_nnz(2), 0U);
}

TEST(Propagation, TwoVertexClosedForm) {
  // L = [[0,1],[1,0]]: (I - mu L)^{-1} = [[1, mu], [mu, 1]] / (1 - mu^2).
  const auto l = normalized_operator(SparseMatrix::from_triplets(2, 2, {{0, 1, 0.7}, {1, 0, 0.7}}));
  const auto o = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}});
  const double mu = 0.6;
  const auto cfg = tight(mu);
  const auto row = propagate_row_pass(o, l, cfg);
  const auto x = propagate_column_pass(row.values, l, cfg);
  const double s = (1.0 - mu) * (1.0 - mu) / ((1.0 - mu * mu) * (1.0 - mu * mu));
  // X = s * [[mu, 1], [mu^2, mu]] with rows from the left inverse and columns from the right.
  EXPECT_NEAR(x.values.at(0, 0), s * mu, 1e-10);
  EXPECT_NEAR(x.values.at(0, 1), s * 1.0, 1e-10);
  EXPECT_NEAR(x.values.at(1, 0), s * mu * mu, 1e-10);
  EXPECT_NEAR(x.values.at(1, 1), s * mu, 1e-10);
}

TEST(Propagation, TwoVertexSymmetricObserved) {
  const auto l = normalized_operator(SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}}));
  const auto o = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
  const auto cfg = tight(0.5);
  const auto row = propagate_row_pass(o, l, cfg);
  const auto x = propagate_column_pass(row.values, l, cfg);
  const Dense expect = closed_form_links(to_eigen(l), to_eigen(o), 0.5);
  EXPECT_LT(max_abs_diff(x.values, expect), 1e-9);
  EXPECT_NEAR(x.values.at(0, 1), x.values.at(1, 0), 1e-9);
  EXPECT_NEAR(x.values.at(0, 0), x.values.at(1, 1), 1e-9);
  EXPECT_TRUE(propagate_column_pass(SparseMatrix(2, 2), l, cfg).values.empty());
}

TEST(Propagation, EmptyObservedMatricesAreSkipped) {
  std::vector<ObservedLinkMatrix> obs{{{1, 2}, SparseMatrix(3, 3)},
                                      {{2, 1}, SparseMatrix::from_triplets(3, 3, {{1, 0, 1.0}})}};
  const auto out = predict_all_links(obs, path3(), tight(0.5));
  ASSERT_EQ(out.size(), 1U);
  EXPECT_EQ(out[0].pair, (LabelPair{2, 1}));
}

TEST(Propagation, RejectsShapeMismatch) {
  std::vector<ObservedLinkMatrix> obs{{{1, 2}, SparseMatrix::from_triplets(4, 4, {{0, 1, 1.0}})}};
  EXPECT_THROW(predict_all_links(obs, path3(), tight(0.5)), Error);
  PropagationConfig bad;
  bad.mu = 1.0;
  EXPECT_THROW(propagate_row_pass(SparseMatrix(3, 3), path3(), bad), Error);
}

TEST(Propagation, SimilarRegionsInheritTheLink) {
  // Clusters {0,1,2} and {3,4,5}; the single observed link (0, 3) should
  // score (1, 4) above the cross pairing (1, 1).
  std::vector<std::vector<double>> f{{1, 0, 0}, {0.99, 0.14, 0}, {0.98, 0, 0.2},
                                     {0, 1, 0}, {0.1, 0.99, 0},  {0, 0.98, 0.2}};
  for (auto& v : f) normalize_l2(v);
  const std::vector<RegionId> ids{0, 1, 2, 3, 4, 5};
  const auto g = build_knn_graph(f, ids, 2);
  const auto o = SparseMatrix::from_triplets(6, 6, {{0, 3, 1.0}});
  std::vector<ObservedLinkMatrix> obs{{{1, 2}, o}};
  const auto out = predict_all_links(obs, g.normalized, tight(0.9));
  ASSERT_EQ(out.size(), 1U);
  const auto& x = out[0].scores;
  EXPECT_GT(x.at(1, 4), x.at(1, 1));
  EXPECT_GT(x.at(2, 5), x.at(2, 2));
  EXPECT_GT(x.at(1, 4), x.at(4, 1));
  EXPECT_LE(x.max_value(), 1.0);
}

class RandomPropagation : public ::testing::TestWithParam<int> {};

TEST_P(RandomPropagation, MatchesClosedFormAndInvariants) {
  for (const double mu : {0.5, 0.9}) {
    const auto inst = testing::random_propagation_instance(1000 + GetParam(), mu);
    const auto cfg = tight(mu);
    const Dense l = to_eigen(inst.graph.normalized);

    std::vector<ObservedLinkMatrix> obs{{{1, 2}, inst.observed}, {{2, 1}, inst.mirrored}};
    const auto out = predict_all_links(obs, inst.graph.normalized, cfg);
    ASSERT_EQ(out.size(), 2U);
    EXPECT_TRUE(out[0].converged);
    const Dense expect = closed_form_links(l, to_eigen(inst.observed), mu);
    EXPECT_LT(max_abs_diff(out[0].scores, expect), 1e-8);

    // Mirrored pair yields the transposed scores.
    EXPECT_LT((to_eigen(out[1].scores) - to_eigen(out[0].scores).transpose()).cwiseAbs().maxCoeff(), 1e-9);

    // Non-negative and bounded by the largest observed entry.
    for (const auto& t : out[0].scores.triplets()) EXPECT_GE(t.value, 0.0);
    EXPECT_LE(out[0].scores.max_value(), 1.0 + 1e-12);

    // Source monotonicity: adding a link never lowers any score.
    auto more = inst.observed.triplets();
    more.push_back({0, inst.n - 1, 1.0});
    const auto o2 = SparseMatrix::from_triplets(inst.n, inst.n, more, SparseMatrix::Duplicates::kMax);
    std::vector<ObservedLinkMatrix> obs2{{{1, 2}, o2}};
    const Dense x2 = to_eigen(predict_all_links(obs2, inst.graph.normalized, cfg)[0].scores);
    EXPECT_GE((x2 - to_eigen(out[0].scores)).minCoeff(), -1e-10);

    // Thread count does not change a single bit.
    auto threaded = cfg;
    threaded.threads = 4;
    const auto out4 = predict_all_links(obs, inst.graph.normalized, threaded);
    EXPECT_EQ(out4[0].scores, out[0].scores);
    EXPECT_EQ(out4[1].scores, out[1].scores);
  }
}

TEST_P(RandomPropagation, LiteralOrientationMatchesItsFixedPoint) {
  const double mu = 0.7;
  const auto inst = testing::random_propagation_instance(2000 + GetParam(), mu);
  auto cfg = tight(mu);
  cfg.orientation = PassOrientation::kLiteral;
  std::vector<ObservedLinkMatrix> obs{{{1, 2}, inst.observed}};
  const auto out = predict_all_links(obs, inst.graph.normalized, cfg);
  const Dense l = to_eigen(inst.graph.normalized);
  const Dense a = Dense::Identity(inst.n, inst.n) - mu * l;
  const Dense inv = a.inverse();
  const Dense expect = (1.0 - mu) * (1.0 - mu) * inv * inv * to_eigen(inst.observed);
  EXPECT_LT(max_abs_diff(out[0].scores, expect), 1e-8);
}

TEST_P(RandomPropagation, TinyMuReducesToObserved) {
  const auto inst = testing::random_propagation_instance(3000 + GetParam(), 1e-12);
  std::vector<ObservedLinkMatrix> obs{{{1, 2}, inst.observed}};
  const auto out = predict_all_links(obs, inst.graph.normalized, tight(1e-12));
  EXPECT_LT(max_abs_diff(out[0].scores, to_eigen(inst.observed)), 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomPropagation, ::testing::Range(0, 20));

TEST(Propagation, NonConvergenceIsReported) {
  const auto inst = testing::random_propagation_instance(5, 0.99);
  PropagationConfig cfg;
  cfg.mu = 0.99;
  cfg.tol = 1e-14;
  cfg.max_iters = 3;
  std::vector<ObservedLinkMatrix> obs{{{1, 2}, inst.observed}};
  std::vector<std::string> warnings;
  ScopedWarningSink sink([&](std::string_view m) { warnings.emplace_back(m); });
  const auto out = predict_all_links(obs, inst.graph.normalized, cfg);
  EXPECT_FALSE(out[0].converged);
  EXPECT_EQ(out[0].row_iterations, 3);
  ASSERT_EQ(warnings.size(), 1U);
  EXPECT_NE(warnings[0].find("did not converge"), std::string::npos);
}

TEST(Propagation, DumpRoundTrip) {
  const auto inst = testing::random_propagation_instance(9, 0.9);
  std::vector<ObservedLinkMatrix> obs{{{1, 2}, inst.observed}, {{2, 1}, inst.mirrored}};
  const auto out = predict_all_links(obs, inst.graph.normalized, tight(0.9));
  std::stringstream s;
  write_scores(s, out);
  const auto back = read_scores(s, inst.n);
  ASSERT_EQ(back.size(), out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(back[i].pair, out[i].pair);
    EXPECT_EQ(back[i].scores, out[i].scores);
    EXPECT_EQ(back[i].converged, out[i].converged);
  }
}

}  // namespace
}  // namespace ctxseg
