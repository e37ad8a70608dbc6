#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "elaxp/analytics.hpp"
#include "elaxp/errors.hpp"
#include "elaxp/rng.hpp"

using namespace elaxp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ShapExplanation make_expl(const MatrixXd& phi, std::string id = "x") {
  ShapExplanation e;
  e.phi = phi;
  e.base = VectorXd::Zero(phi.cols());
  e.instance_id = std::move(id);
  for (Eigen::Index f = 0; f < phi.rows(); ++f) e.feature_names.push_back("f" + std::to_string(f));
  for (Eigen::Index t = 0; t < phi.cols(); ++t) e.target_names.push_back("t" + std::to_string(t));
  return e;
}

std::vector<ShapExplanation> random_expls(Rng& rng, int n, int features, int targets) {
  std::vector<ShapExplanation> out;
  for (int i = 0; i < n; ++i) {
    MatrixXd phi(features, targets);
    for (Eigen::Index k = 0; k < phi.size(); ++k) phi.data()[k] = rng.uniform(-2, 2);
    out.push_back(make_expl(phi, "i" + std::to_string(i)));
  }
  return out;
}

GlobalImportance importance_of(const VectorXd& v) {
  MatrixXd phi = v;
  std::vector<ShapExplanation> e{make_expl(phi)};
  return global_importance(e);
}

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(Importance, AbsoluteMean) {
  MatrixXd a(2, 1), b(2, 1);
  a << 1, 0;
  b << -1, 0;
  std::vector<ShapExplanation> e{make_expl(a), make_expl(b)};
  const auto imp = global_importance(e);
  EXPECT_EQ(imp.values(0, 0), 1.0);
  EXPECT_EQ(imp.values(1, 0), 0.0);
  EXPECT_EQ(imp.ranking(0).back(), 1);
  EXPECT_EQ(global_importance(e, false).values(0, 0), 0.0);
}

TEST(Importance, AgreesWithDirectMean) {
  Rng rng(3);
  const auto e = random_expls(rng, 17, 6, 3);
  const auto imp = global_importance(e);
  for (int f = 0; f < 6; ++f) {
    for (int t = 0; t < 3; ++t) {
      double s = 0;
      for (const auto& x : e) s += std::abs(x.phi(f, t));
      EXPECT_NEAR(imp.values(f, t), s / 17, 1e-15);
    }
  }
}

TEST(Importance, FoldAveraging) {
  VectorXd a(1), b(1);
  a << 0.2;
  b << 0.4;
  const std::vector<GlobalImportance> folds{importance_of(a), importance_of(b)};
  EXPECT_NEAR(average_importance(folds).values(0, 0), 0.3, 1e-16);
}

TEST(Importance, RankingTiesKeepCatalogOrder) {
  VectorXd v(4);
  v << 1, 3, 1, 3;
  EXPECT_EQ(importance_of(v).ranking(0), (std::vector<int>{1, 3, 0, 2}));
}

TEST(TopK, ClampAndPrefix) {
  Rng rng(4);
  const auto imp = global_importance(random_expls(rng, 5, 8, 1));
  const auto all = top_k(imp, 0, 8);
  EXPECT_EQ(as_set(all).size(), 8u);
  EXPECT_EQ(top_k(imp, 0, 50), all);
  const auto one = top_k(imp, 0, 1);
  ASSERT_EQ(one.size(), 1u);
  const auto r = imp.ranking(0);
  EXPECT_EQ(one[0], imp.feature_names[static_cast<std::size_t>(r[0])]);
  const auto three = top_k(imp, 0, 3);
  EXPECT_TRUE(std::equal(three.begin(), three.end(), all.begin()));
}

TEST(TopK, PositiveScalingInvariant) {
  Rng rng(5);
  auto e = random_expls(rng, 6, 10, 2);
  const auto before = top_k(global_importance(e), 1, 4);
  for (auto& x : e) x.phi *= 7.5;
  EXPECT_EQ(top_k(global_importance(e), 1, 4), before);
}

TEST(Venn, RegionsPartitionTheUnion) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<std::string>> sets(3);
    for (auto& s : sets) {
      for (int i = 0; i < 12; ++i) {
        if (rng.uniform() < 0.4) s.push_back("e" + std::to_string(i));
      }
    }
    const auto rep = intersect(sets, {"A", "B", "C"});
    ASSERT_EQ(rep.regions.size(), 7u);
    std::set<std::string> uni;
    for (const auto& s : sets) uni.insert(s.begin(), s.end());
    EXPECT_EQ(rep.union_size, uni.size());
    std::size_t total = 0;
    std::set<std::string> seen;
    for (unsigned mask = 1; mask < 8; ++mask) {
      total += rep.region_size(mask);
      for (const auto& m : rep.regions[mask - 1].members) {
        EXPECT_TRUE(seen.insert(m).second);
        for (unsigned i = 0; i < 3; ++i) {
          const auto in = as_set(sets[i]).count(m) > 0;
          EXPECT_EQ(in, ((mask >> i) & 1u) != 0);
        }
      }
    }
    EXPECT_EQ(total, uni.size());
    // |A| recovered from its regions.
    EXPECT_EQ(rep.region_size(1) + rep.region_size(3) + rep.region_size(5) + rep.region_size(7),
              as_set(sets[0]).size());
  }
}

TEST(Venn, TwoSetsAndIdentity) {
  const auto rep = intersect({{"a", "b"}, {"b", "c"}}, {"S", "M"});
  EXPECT_EQ(rep.regions.size(), 3u);
  EXPECT_EQ(rep.region_size(3), 1u);
  EXPECT_EQ(rep.regions[2].members, std::vector<std::string>{"b"});
  const auto same = intersect({{"a", "b"}, {"b", "a"}}, {"S", "M"});
  EXPECT_EQ(same.region_size(1), 0u);
  EXPECT_EQ(same.region_size(2), 0u);
  EXPECT_EQ(same.region_size(3), 2u);
  EXPECT_THROW(intersect({{"a"}}, {"S"}), InvalidArgument);
}

TEST(Beeswarm, ShapeAndNormalisation) {
  Rng rng(7);
  const auto e = random_expls(rng, 9, 5, 2);
  MatrixXd fv(9, 5);
  for (Eigen::Index k = 0; k < fv.size(); ++k) fv.data()[k] = rng.uniform(-3, 3);
  fv.col(2).setConstant(4.0);
  const auto rows = beeswarm_export(e, fv, 3);
  ASSERT_EQ(rows.size(), 2u * 3u * 9u);
  const auto imp = global_importance(e);
  for (int t = 0; t < 2; ++t) {
    const auto names = top_k(imp, t, 3);
    for (int f = 0; f < 3; ++f) {
      for (int i = 0; i < 9; ++i) {
        const auto& r = rows[static_cast<std::size_t>(t * 27 + f * 9 + i)];
        EXPECT_EQ(r.target, imp.target_names[static_cast<std::size_t>(t)]);
        EXPECT_EQ(r.feature, names[static_cast<std::size_t>(f)]);
      }
    }
  }
  for (const auto& r : rows) {
    const int col = std::stoi(r.feature.substr(1));
    const double lo = fv.col(col).minCoeff(), hi = fv.col(col).maxCoeff();
    if (col == 2) {
      EXPECT_EQ(r.normalized_value, 0.5);
    } else {
      EXPECT_GE(r.normalized_value, 0.0);
      EXPECT_LE(r.normalized_value, 1.0);
      if (r.feature_value == lo) EXPECT_EQ(r.normalized_value, 0.0);
      if (r.feature_value == hi) EXPECT_EQ(r.normalized_value, 1.0);
    }
  }
  EXPECT_EQ(beeswarm_export(e, fv, 100).size(), 2u * 5u * 9u);
  EXPECT_THROW(beeswarm_export(e, MatrixXd::Zero(8, 5), 3), InvalidArgument);
}

TEST(Representation, SignedMeanAndCosine) {
  MatrixXd a(3, 2), b(3, 2);
  a << 1, 0, -2, 0, 0, 5;
  b << 3, 0, 2, 0, 0, 5;
  const std::vector<ShapExplanation> e{make_expl(a), make_expl(b)};
  const auto r = shapley_representation(e, 0, "alg", 4);
  EXPECT_EQ(r.values, (VectorXd(3) << 2, 0, 0).finished());
  EXPECT_EQ(r.fold_id, 4);
  const auto single = shapley_representation(std::span(e).first(1), 1, "alg", 1);
  EXPECT_EQ(single.values, a.col(1));
  EXPECT_EQ(cosine_similarity(r.values, VectorXd::Zero(3)), 0.0);
  EXPECT_NEAR(cosine_similarity(r.values, 3 * r.values), 1.0, 1e-15);
  EXPECT_NEAR(cosine_similarity(r.values, -r.values), -1.0, 1e-15);
  EXPECT_EQ(cosine_similarity(r.values, single.values), 0.0);
}

TEST(LocalExplanation, ContributionsSumToPrediction) {
  Rng rng(8);
  auto e = random_expls(rng, 1, 12, 2).front();
  e.base << 0.5, -1.0;
  e.phi(3, 0) = 0.0;
  for (int top : {3, 12, 40}) {
    const auto items = local_explanation(e, top);
    ASSERT_EQ(items.size(), 2u);
    for (std::size_t t = 0; t < 2; ++t) {
      const auto& it = items[t];
      double s = it.base + it.rest;
      for (const auto& c : it.contributions) s += c.phi;
      EXPECT_NEAR(s, it.prediction, 1e-9);
      EXPECT_NEAR(it.prediction, e.output()(static_cast<Eigen::Index>(t)), 1e-12);
      for (std::size_t k = 1; k < it.contributions.size(); ++k) {
        EXPECT_GE(std::abs(it.contributions[k - 1].phi), std::abs(it.contributions[k].phi));
      }
      if (top >= 12) EXPECT_EQ(it.rest, 0.0);
    }
    EXPECT_EQ(items[0].contributions.size(), static_cast<std::size_t>(std::min(top, 11)));
  }
}

TEST(LocalExplanation, AllZero) {
  auto e = make_expl(MatrixXd::Zero(4, 1));
  e.base << 2.5;
  const auto items = local_explanation(e, 10);
  EXPECT_TRUE(items[0].contributions.empty());
  EXPECT_EQ(items[0].prediction, 2.5);
  EXPECT_EQ(items[0].rest, 0.0);
}
