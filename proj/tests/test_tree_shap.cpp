#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "elaxp/errors.hpp"
#include "elaxp/tree_shap.hpp"
#include "random_trees.hpp"

using namespace elaxp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Tree stump() {
  std::vector<Tree::Node> nodes(3);
  nodes[0].feature = 0;
  nodes[0].threshold = 0.5;
  nodes[0].left = 1;
  nodes[0].right = 2;
  nodes[0].cover = 100;
  nodes[1].cover = 50;
  nodes[1].value = {0.0};
  nodes[2].cover = 50;
  nodes[2].value = {1.0};
  return Tree(nodes, 3, 1);
}

// Expected output when only the features flagged in `known` follow x.
double conditional_output(const Tree& t, const std::vector<double>& x, const std::vector<bool>& known, int id,
                          int target) {
  const auto& n = t.nodes()[static_cast<std::size_t>(id)];
  if (n.is_leaf()) return n.value[static_cast<std::size_t>(target)];
  if (known[static_cast<std::size_t>(n.feature)]) {
    return conditional_output(t, x, known, x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right,
                              target);
  }
  const auto& l = t.nodes()[static_cast<std::size_t>(n.left)];
  const auto& r = t.nodes()[static_cast<std::size_t>(n.right)];
  return (l.cover * conditional_output(t, x, known, n.left, target) +
          r.cover * conditional_output(t, x, known, n.right, target)) /
         n.cover;
}

// Shapley values as the average marginal contribution over all feature
// orderings.
MatrixXd permutation_shap(const Tree& t, const std::vector<double>& x) {
  const int f = t.n_features();
  MatrixXd phi = MatrixXd::Zero(f, t.n_targets());
  std::vector<int> order(static_cast<std::size_t>(f));
  std::iota(order.begin(), order.end(), 0);
  double count = 0;
  do {
    std::vector<bool> known(static_cast<std::size_t>(f), false);
    for (int k : order) {
      for (int target = 0; target < t.n_targets(); ++target) {
        const double before = conditional_output(t, x, known, 0, target);
        known[static_cast<std::size_t>(k)] = true;
        phi(k, target) += conditional_output(t, x, known, 0, target) - before;
        known[static_cast<std::size_t>(k)] = false;
      }
      known[static_cast<std::size_t>(k)] = true;
    }
    count += 1;
  } while (std::next_permutation(order.begin(), order.end()));
  return phi / count;
}

}  // namespace

TEST(TreeShap, StumpExample) {
  const auto t = stump();
  const std::vector<double> x{0.9, 0.0, 0.0};
  const auto e = shap_tree(t, x);
  EXPECT_DOUBLE_EQ(e.base(0), 0.5);
  EXPECT_DOUBLE_EQ(e.phi(0, 0), 0.5);
  EXPECT_EQ(e.phi(1, 0), 0.0);
  EXPECT_EQ(e.phi(2, 0), 0.0);
  const auto b = brute_force_shap(t, x);
  EXPECT_DOUBLE_EQ(b.phi(0, 0), 0.5);
}

TEST(TreeShap, MatchesPermutationOracle) {
  Rng rng(2024);
  for (int i = 0; i < 60; ++i) {
    const auto t = fixtures::random_tree(rng, 5, 4, 2);
    for (int k = 0; k < 3; ++k) {
      const auto x = fixtures::random_input(rng, 5);
      const MatrixXd expected = permutation_shap(t, x);
      EXPECT_LT((shap_tree(t, x).phi - expected).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_LT((brute_force_shap(t, x).phi - expected).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(TreeShap, LocalAccuracyAndNullPlayer) {
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const auto t = fixtures::random_tree(rng, 8, 5, 3);
    std::vector<bool> used(8, false);
    for (const auto& n : t.nodes()) {
      if (!n.is_leaf()) used[static_cast<std::size_t>(n.feature)] = true;
    }
    const auto x = fixtures::random_input(rng, 8);
    const auto e = shap_tree(t, x);
    const auto& pred = t.predict(x);
    for (int target = 0; target < 3; ++target) {
      EXPECT_NEAR(e.output()(target), pred[static_cast<std::size_t>(target)], 1e-9);
    }
    for (int f = 0; f < 8; ++f) {
      if (!used[static_cast<std::size_t>(f)]) EXPECT_EQ(e.phi.row(f).cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(TreeShap, RepeatedFeatureOnPath) {
  // Feature 0 is split twice along the same path.
  std::vector<Tree::Node> n(5);
  n[0] = {0, 0.0, 1, 2, 10.0, {}};
  n[1] = {0, -0.5, 3, 4, 6.0, {}};
  n[2] = {-1, 0.0, -1, -1, 4.0, {5.0}};
  n[3] = {-1, 0.0, -1, -1, 1.0, {-3.0}};
  n[4] = {-1, 0.0, -1, -1, 5.0, {2.0}};
  const Tree t(n, 2, 1);
  for (double v : {-1.0, -0.2, 0.7}) {
    const std::vector<double> x{v, 0.0};
    EXPECT_LT((shap_tree(t, x).phi - permutation_shap(t, x)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(TreeShap, SymmetricFeaturesShareCredit) {
  std::vector<Tree::Node> n(7);
  n[0] = {0, 0.0, 1, 2, 4.0, {}};
  n[1] = {1, 0.0, 3, 4, 2.0, {}};
  n[2] = {1, 0.0, 5, 6, 2.0, {}};
  n[3] = {-1, 0.0, -1, -1, 1.0, {0.0}};
  n[4] = {-1, 0.0, -1, -1, 1.0, {1.0}};
  n[5] = {-1, 0.0, -1, -1, 1.0, {1.0}};
  n[6] = {-1, 0.0, -1, -1, 1.0, {2.0}};
  const Tree t(n, 2, 1);
  const std::vector<double> x{1.0, 1.0};
  const auto e = brute_force_shap(t, x);
  EXPECT_NEAR(e.phi(0, 0), e.phi(1, 0), 1e-15);
  EXPECT_NEAR(shap_tree(t, x).phi(0, 0), shap_tree(t, x).phi(1, 0), 1e-15);
}

TEST(TreeShap, ConstantLeaves) {
  std::vector<Tree::Node> n(3);
  n[0] = {1, 0.0, 1, 2, 3.0, {}};
  n[1] = {-1, 0.0, -1, -1, 1.0, {4.0}};
  n[2] = {-1, 0.0, -1, -1, 2.0, {4.0}};
  const Tree t(n, 2, 1);
  const std::vector<double> x{0.3, 0.3};
  for (const auto& e : {shap_tree(t, x), brute_force_shap(t, x)}) {
    EXPECT_NEAR(e.base(0), 4.0, 1e-14);
    EXPECT_LT(e.phi.cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(TreeShap, ForestIsMeanOfTrees) {
  Rng rng(11);
  const auto a = fixtures::random_tree(rng, 4, 3, 2);
  const auto b = fixtures::random_tree(rng, 4, 3, 2);
  const Forest f({a, b}, ForestParams{}, {"p", "q", "r", "s"}, {"u", "v"});
  const auto x = fixtures::random_input(rng, 4);
  const auto e = shap_forest(f, x, "row");
  const MatrixXd mean = (shap_tree(a, x).phi + shap_tree(b, x).phi) / 2.0;
  EXPECT_LT((e.phi - mean).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((e.output() - f.predict(x)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(e.instance_id, "row");
  EXPECT_EQ(e.target_names, f.target_names());

  const Forest twin({a, a}, ForestParams{}, {"p", "q", "r", "s"}, {"u", "v"});
  EXPECT_LT((shap_forest(twin, x).phi - shap_tree(a, x).phi).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(TreeShap, FittedForestLocalAccuracy) {
  Rng rng(3);
  MatrixXd x(80, 6), y(80, 3);
  for (int i = 0; i < 80; ++i) {
    for (int j = 0; j < 6; ++j) x(i, j) = rng.uniform(-1, 1);
    y(i, 0) = x(i, 0) * x(i, 1);
    y(i, 1) = std::abs(x(i, 2)) + rng.normal() * 0.1;
    y(i, 2) = static_cast<double>(rng.below(3));
  }
  ForestParams p;
  p.n_estimators = 10;
  p.seed = 4;
  const auto f = fit_forest(x, y, p);
  for (int i = 0; i < 80; ++i) {
    std::vector<double> row(6);
    for (int j = 0; j < 6; ++j) row[static_cast<std::size_t>(j)] = x(i, j);
    const auto e = shap_forest(f, row);
    EXPECT_LT((e.output() - f.predict(row)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(TreeShap, Deterministic) {
  Rng rng(5);
  const auto t = fixtures::random_tree(rng, 6, 4, 1);
  const auto x = fixtures::random_input(rng, 6);
  EXPECT_EQ(shap_tree(t, x).phi, shap_tree(t, x).phi);
}

TEST(TreeShap, MissingCoversRejected) {
  std::vector<Tree::Node> n(3);
  n[0] = {0, 0.0, 1, 2, 2.0, {}};
  n[1] = {-1, 0.0, -1, -1, 0.0, {1.0}};
  n[2] = {-1, 0.0, -1, -1, 2.0, {2.0}};
  const Tree t(n, 1, 1);
  EXPECT_THROW(shap_tree(t, std::vector<double>{0.0}), InvalidState);
  EXPECT_THROW(brute_force_shap(t, std::vector<double>{0.0}), InvalidState);
}

TEST(TreeShap, BruteForceRefusesWideTrees) {
  std::vector<Tree::Node> nodes;
  // A chain whose right child is always the next split, on 16 features.
  for (int f = 0; f < 16; ++f) {
    const int id = 2 * f;
    nodes.push_back({f, 0.0, id + 1, id + 2, 1.0, {}});
    nodes.push_back({-1, 0.0, -1, -1, 1.0, {static_cast<double>(f)}});
  }
  nodes.push_back({-1, 0.0, -1, -1, 1.0, {99.0}});
  const Tree t(nodes, 16, 1);
  EXPECT_THROW(brute_force_shap(t, std::vector<double>(16, 0.0)), InvalidArgument);
  EXPECT_NO_THROW(shap_tree(t, std::vector<double>(16, 0.0)));
}

TEST(ShapExplanation, SerialisationRoundTrip) {
  Rng rng(8);
  const auto t = fixtures::random_tree(rng, 3, 3, 2);
  auto e = shap_tree(t, fixtures::random_input(rng, 3));
  e.instance_id = "f1_i1";
  const auto back = ShapExplanation::from_json(nlohmann::json::parse(e.to_json().dump()));
  EXPECT_EQ(back.phi, e.phi);
  EXPECT_EQ(back.base, e.base);
  EXPECT_EQ(back.instance_id, "f1_i1");
  const auto text = e.to_csv();
  EXPECT_EQ(text.substr(0, text.find('\n')), "feature,phi_y0,phi_y1");
  EXPECT_NE(text.find("\n(base),"), std::string::npos);
}
