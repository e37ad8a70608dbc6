#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "elaxp/errors.hpp"
#include "elaxp/forest.hpp"
#include "elaxp/rng.hpp"
#include "elaxp/stats.hpp"

using namespace elaxp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(int rows, int cols, std::uint64_t seed, bool integer = false) {
  Rng r(seed);
  MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = integer ? static_cast<double>(r.below(5)) : r.uniform(-1, 1);
  }
  return m;
}

std::vector<double> row(const MatrixXd& x, int r) {
  std::vector<double> v(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) v[static_cast<std::size_t>(c)] = x(r, c);
  return v;
}

double sad(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = stats::median(v);
  double s = 0.0;
  for (double x : v) s += std::abs(x - m);
  return s;
}

struct BestSplit {
  int feature = -1;
  double threshold = 0.0;
  double score = std::numeric_limits<double>::infinity();
  int near_ties = 0;  // other candidates within 1e-9 of the best score
};

// Exhaustive search over midpoints, scoring each candidate from scratch.
BestSplit brute_force_root_split(const MatrixXd& x, const MatrixXd& y) {
  BestSplit best;
  std::vector<double> scores;
  for (int f = 0; f < x.cols(); ++f) {
    std::vector<double> values(x.col(f).data(), x.col(f).data() + x.rows());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      const double thr = values[k] + (values[k + 1] - values[k]) / 2.0;
      double score = 0.0;
      for (int t = 0; t < y.cols(); ++t) {
        std::vector<double> l, r;
        for (int i = 0; i < x.rows(); ++i) (x(i, f) <= thr ? l : r).push_back(y(i, t));
        score += sad(l) + sad(r);
      }
      scores.push_back(score);
      if (score < best.score - 1e-9) best = {f, thr, score, 0};
    }
  }
  for (double s : scores) best.near_ties += std::abs(s - best.score) <= 1e-9 ? 1 : 0;
  best.near_ties -= 1;
  return best;
}

void check_structure_equal(const Tree& a, const Tree& b) {
  ASSERT_EQ(a.nodes().size(), b.nodes().size());
  for (std::size_t i = 0; i < a.nodes().size(); ++i) {
    EXPECT_EQ(a.nodes()[i].feature, b.nodes()[i].feature);
    EXPECT_EQ(a.nodes()[i].threshold, b.nodes()[i].threshold);
    EXPECT_EQ(a.nodes()[i].left, b.nodes()[i].left);
    EXPECT_EQ(a.nodes()[i].cover, b.nodes()[i].cover);
  }
}

Tree constant_tree(double v) {
  Tree::Node leaf;
  leaf.cover = 1;
  leaf.value = {v};
  return Tree({leaf}, 1, 1);
}

}  // namespace

TEST(Tree, DepthZeroPredictsMedian) {
  MatrixXd x(3, 1);
  x << 0, 1, 2;
  MatrixXd y(3, 1);
  y << 1, 2, 10;
  const auto t = fit_tree(x, y, {0, 1, 1.0}, 0);
  EXPECT_EQ(t.nodes().size(), 1u);
  EXPECT_EQ(t.predict(std::vector<double>{0.0})[0], 2.0);
}

TEST(Tree, OneSplitSeparatesTwoLevels) {
  MatrixXd x(4, 1);
  x << 0.1, 0.2, 0.8, 0.9;
  MatrixXd y(4, 1);
  y << 0, 0, 1, 1;
  const auto t = fit_tree(x, y, {}, 0);
  EXPECT_EQ(t.depth(), 1);
  EXPECT_DOUBLE_EQ(t.nodes()[0].threshold, 0.5);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(t.predict(std::vector<double>{x(i, 0)})[0], y(i, 0));
}

TEST(Tree, RootSplitMatchesExhaustiveSearch) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const bool ties = seed % 2 == 0;
    const MatrixXd x = random_matrix(25, 3, seed, ties);
    const MatrixXd y = random_matrix(25, 1 + static_cast<int>(seed % 3), seed + 1000, ties);
    const auto expected = brute_force_root_split(x, y);
    const auto t = fit_tree(x, y, {1, 1, 1.0}, 0);
    if (expected.feature < 0) {
      EXPECT_TRUE(t.nodes()[0].is_leaf());
      continue;
    }
    // The tree may pick a different split only when its score ties.
    const auto& root = t.nodes()[0];
    ASSERT_FALSE(root.is_leaf());
    double score = 0.0;
    for (int c = 0; c < y.cols(); ++c) {
      std::vector<double> l, r;
      for (int i = 0; i < x.rows(); ++i) (x(i, root.feature) <= root.threshold ? l : r).push_back(y(i, c));
      score += sad(l) + sad(r);
    }
    EXPECT_NEAR(score, expected.score, 1e-9) << "seed " << seed;
    if (expected.near_ties == 0) {
      EXPECT_EQ(root.feature, expected.feature);
      EXPECT_EQ(root.threshold, expected.threshold);
    }
  }
}

TEST(Tree, DuplicatedTargetGivesSameStructure) {
  const MatrixXd x = random_matrix(60, 4, 1);
  const MatrixXd y1 = random_matrix(60, 1, 2);
  MatrixXd y2(60, 2);
  y2 << y1, y1;
  check_structure_equal(fit_tree(x, y1, {}, 3), fit_tree(x, y2, {}, 3));
}

TEST(Tree, CoversAddUpAndShrink) {
  const MatrixXd x = random_matrix(80, 3, 4);
  const MatrixXd y = random_matrix(80, 2, 5);
  const auto t = fit_tree(x, y, {}, 0);
  EXPECT_EQ(t.nodes()[0].cover, 80.0);
  for (const auto& n : t.nodes()) {
    if (n.is_leaf()) {
      EXPECT_EQ(n.value.size(), 2u);
      continue;
    }
    const auto& l = t.nodes()[static_cast<std::size_t>(n.left)];
    const auto& r = t.nodes()[static_cast<std::size_t>(n.right)];
    EXPECT_EQ(n.cover, l.cover + r.cover);
    EXPECT_LE(l.cover, n.cover);
    EXPECT_LE(r.cover, n.cover);
  }
}

TEST(Tree, MinSamplesLeafAndMaxDepth) {
  const MatrixXd x = random_matrix(100, 3, 6);
  const MatrixXd y = random_matrix(100, 1, 7);
  const auto t = fit_tree(x, y, {3, 7, 1.0}, 0);
  EXPECT_LE(t.depth(), 3);
  for (const auto& n : t.nodes()) {
    if (n.is_leaf()) EXPECT_GE(n.cover, 7.0);
  }
}

TEST(Tree, Errors) {
  EXPECT_THROW(fit_tree(MatrixXd(0, 2), MatrixXd(0, 1), {}, 0), InvalidArgument);
  EXPECT_THROW(fit_tree(MatrixXd::Zero(3, 2), MatrixXd::Zero(4, 1), {}, 0), InvalidArgument);
  MatrixXd x = MatrixXd::Zero(3, 2);
  x(1, 1) = std::nan("");
  EXPECT_THROW(fit_tree(x, MatrixXd::Zero(3, 1), {}, 0), InvalidArgument);
  EXPECT_THROW(fit_tree(MatrixXd::Zero(3, 2), MatrixXd::Zero(3, 1), {5, 0, 1.0}, 0), InvalidArgument);
  const auto t = fit_tree(MatrixXd::Zero(3, 2), MatrixXd::Zero(3, 1), {}, 0);
  EXPECT_THROW(t.predict(std::vector<double>{1.0}), InvalidArgument);
}

TEST(Forest, SingleTreeWithoutBootstrapEqualsTree) {
  const MatrixXd x = random_matrix(50, 3, 8);
  const MatrixXd y = random_matrix(50, 2, 9);
  ForestParams p;
  p.n_estimators = 1;
  p.bootstrap = false;
  const auto f = fit_forest(x, y, p);
  const auto t = fit_tree(x, y, p.tree_params(), 0);
  for (int i = 0; i < 50; ++i) {
    const auto r = row(x, i);
    const auto a = f.predict(r);
    EXPECT_EQ(a(0), t.predict(r)[0]);
    EXPECT_EQ(a(1), t.predict(r)[1]);
  }
}

TEST(Forest, MeanOfTrees) {
  const Forest f({constant_tree(1.0), constant_tree(3.0)}, ForestParams{}, {"a"}, {"y"});
  EXPECT_EQ(f.predict(std::vector<double>{0.0})(0), 2.0);
}

TEST(Forest, OutputShapeAndDeterminism) {
  const MatrixXd x = random_matrix(40, 4, 10);
  const MatrixXd y = random_matrix(40, 3, 11);
  ForestParams p;
  p.seed = 77;
  p.max_features = 0.5;
  const auto a = fit_forest(x, y, p);
  const auto b = fit_forest(x, y, p);
  const MatrixXd pa = a.predict(x);
  EXPECT_EQ(pa.cols(), 3);
  EXPECT_EQ(pa, b.predict(x));
  EXPECT_EQ(a.to_json(), b.to_json());
}

TEST(Forest, MemorisesDistinctRows) {
  const MatrixXd x = random_matrix(30, 2, 12);
  const MatrixXd y = random_matrix(30, 2, 13);
  ForestParams p;
  p.bootstrap = false;
  p.n_estimators = 1;
  EXPECT_EQ((fit_forest(x, y, p).predict(x) - y).cwiseAbs().maxCoeff(), 0.0);
  p.n_estimators = 3;
  EXPECT_LT((fit_forest(x, y, p).predict(x) - y).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Forest, PredictionsStayWithinTargetRange) {
  const MatrixXd x = random_matrix(60, 3, 14);
  const MatrixXd y = random_matrix(60, 2, 15);
  ForestParams p;
  p.seed = 3;
  const auto f = fit_forest(x, y, p);
  const MatrixXd q = f.predict(random_matrix(200, 3, 16));
  for (int t = 0; t < 2; ++t) {
    EXPECT_GE(q.col(t).minCoeff(), y.col(t).minCoeff());
    EXPECT_LE(q.col(t).maxCoeff(), y.col(t).maxCoeff());
  }
}

TEST(Forest, ConstantShiftMovesPredictionsOnly) {
  const MatrixXd x = random_matrix(60, 3, 17);
  // Dyadic values keep the shifted sums exact.
  MatrixXd y = (random_matrix(60, 2, 18) * 64.0).array().round() / 64.0;
  ForestParams p;
  p.seed = 5;
  const auto a = fit_forest(x, y, p);
  MatrixXd shifted = y;
  shifted.col(1).array() += 8.0;
  const auto b = fit_forest(x, shifted, p);
  for (std::size_t i = 0; i < a.trees().size(); ++i) {
    check_structure_equal(a.trees()[i], b.trees()[i]);
    for (std::size_t k = 0; k < a.trees()[i].nodes().size(); ++k) {
      const auto& la = a.trees()[i].nodes()[k];
      const auto& lb = b.trees()[i].nodes()[k];
      if (!la.is_leaf()) continue;
      EXPECT_EQ(la.value[0], lb.value[0]);
      EXPECT_EQ(la.value[1] + 8.0, lb.value[1]);
    }
  }
  // The forest mean divides by the tree count, so the shift survives up to
  // rounding of that division.
  const MatrixXd pa = a.predict(x);
  const MatrixXd pb = b.predict(x);
  EXPECT_EQ(pa.col(0), pb.col(0));
  EXPECT_LT((pa.col(1).array() + 8.0 - pb.col(1).array()).abs().maxCoeff(), 1e-13);
}

TEST(Forest, SingleTargetMtrEqualsStr) {
  const MatrixXd x = random_matrix(50, 4, 19);
  const MatrixXd y = random_matrix(50, 1, 20);
  auto str = ForestParams::str_defaults();
  auto mtr = ForestParams::mtr_defaults();
  EXPECT_EQ(str.n_estimators, 25);
  EXPECT_EQ(str.max_depth, 25);
  EXPECT_EQ(mtr.n_estimators, 75);
  mtr.n_estimators = str.n_estimators;
  str.seed = mtr.seed = 99;
  EXPECT_EQ(fit_forest(x, y, str).predict(x), fit_forest(x, y, mtr).predict(x));
}

TEST(Forest, JsonRoundTrip) {
  const MatrixXd x = random_matrix(30, 3, 21);
  const MatrixXd y = random_matrix(30, 2, 22);
  ForestParams p;
  p.n_estimators = 4;
  const auto f = fit_forest(x, y, p, {"a", "b", "c"}, {"u", "v"});
  const auto text = f.to_json().dump();
  const auto back = Forest::from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back.params(), f.params());
  EXPECT_EQ(back.feature_names(), f.feature_names());
  EXPECT_EQ(back.predict(x), f.predict(x));
  EXPECT_EQ(f.to_json()["params"]["criterion"], "mae");
}

TEST(Forest, ParamValidation) {
  ForestParams p;
  p.n_estimators = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.max_depth = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.max_features = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
}
