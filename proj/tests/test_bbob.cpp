#include <gtest/gtest.h>

#include <cmath>

#include "elaxp/bbob.hpp"
#include "elaxp/errors.hpp"
#include "elaxp/rng.hpp"

using namespace elaxp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double t_osz(double v) {
  if (v == 0.0) return 0.0;
  const double h = std::log(std::abs(v));
  const double c1 = v > 0 ? 10.0 : 5.5;
  const double c2 = v > 0 ? 7.9 : 3.1;
  return (v > 0 ? 1.0 : -1.0) * std::exp(h + 0.049 * (std::sin(c1 * h) + std::sin(c2 * h)));
}

double ellipsoid_reference(const VectorXd& z) {
  const auto d = z.size();
  double f = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double w = std::pow(1e6, static_cast<double>(i) / static_cast<double>(d - 1));
    const double o = t_osz(z(i));
    f += w * o * o;
  }
  return f;
}

VectorXd random_point(Rng& r, int d) {
  VectorXd x(d);
  for (int i = 0; i < d; ++i) x(i) = r.uniform(-5, 5);
  return x;
}

}  // namespace

TEST(Bbob, DeterministicInstances) {
  for (int fid = 1; fid <= kNumFunctions; ++fid) {
    const auto a = make_problem(fid, 1234, 5);
    const auto b = make_problem(fid, 1234, 5);
    EXPECT_EQ(a.x_opt(), b.x_opt());
    EXPECT_EQ(a.f_opt(), b.f_opt());
    Rng r(fid);
    const VectorXd x = random_point(r, 5);
    EXPECT_EQ(a(x), b(x));
  }
}

TEST(Bbob, DistinctSeedsDistinctOptima) {
  const auto a = make_problem(3, 1, 5);
  const auto b = make_problem(3, 2, 5);
  EXPECT_NE(a.x_opt(), b.x_opt());
}

TEST(Bbob, SphereHasNoRotation) {
  EXPECT_FALSE(make_problem(1, 7, 5).rotation_a().has_value());
  EXPECT_FALSE(make_problem(1, 7, 5).rotation_b().has_value());
}

TEST(Bbob, RotationsAreOrthogonal) {
  for (int fid = 1; fid <= kNumFunctions; ++fid) {
    const auto p = make_problem(fid, 99, 5);
    for (const auto* rot : {&p.rotation_a(), &p.rotation_b()}) {
      if (!rot->has_value()) continue;
      // Gram-Schmidt check: every column has unit norm and is orthogonal to
      // the columns before it.
      const MatrixXd& r = **rot;
      for (int j = 0; j < 5; ++j) {
        EXPECT_NEAR(r.col(j).norm(), 1.0, 1e-10);
        for (int k = 0; k < j; ++k) EXPECT_NEAR(r.col(j).dot(r.col(k)), 0.0, 1e-10);
      }
      EXPECT_LT((r.transpose() * r - MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Bbob, OptimumValue) {
  for (int dim : {2, 5}) {
    for (int fid = 1; fid <= kNumFunctions; ++fid) {
      for (std::uint64_t seed : {1u, 17u, 2024u}) {
        const auto p = make_problem(fid, seed, dim);
        EXPECT_GE(p.f_opt(), -100.0);
        EXPECT_LE(p.f_opt(), 100.0);
        EXPECT_NEAR(std::round(p.f_opt() * 100.0) / 100.0, p.f_opt(), 1e-12);
        EXPECT_LE(p.x_opt().cwiseAbs().maxCoeff(), 5.0) << "f" << fid;
        if (p.has_exact_optimum()) {
          EXPECT_NEAR(p(p.x_opt()), p.f_opt(), 1e-9) << "f" << fid << " dim " << dim << " seed " << seed;
        }
      }
    }
  }
}

TEST(Bbob, NoPointBelowOptimum) {
  Rng r(1);
  for (int fid = 1; fid <= kNumFunctions; ++fid) {
    const auto p = make_problem(fid, 5, 3);
    for (int i = 0; i < 2000; ++i) {
      const VectorXd x = random_point(r, 3);
      const double f = p(x);
      ASSERT_TRUE(std::isfinite(f)) << "f" << fid;
      ASSERT_GE(f, p.f_opt() - 1e-9) << "f" << fid;
    }
  }
}

TEST(Bbob, SphereUnitOffset) {
  const auto p = make_problem(1, 42, 5);
  VectorXd x = p.x_opt();
  x(0) += 1.0;
  EXPECT_NEAR(p(x), p.f_opt() + 1.0, 1e-12);
}

TEST(Bbob, SeparableEllipsoidMatchesReference) {
  const auto p = make_problem(2, 8, 4);
  Rng r(2);
  for (int i = 0; i < 50; ++i) {
    const VectorXd x = random_point(r, 4);
    const double expected = ellipsoid_reference(x - p.x_opt()) + p.f_opt();
    EXPECT_NEAR(p(x), expected, 1e-9 * std::max(1.0, std::abs(expected)));
  }
}

TEST(Bbob, RotatedEllipsoidMatchesReference) {
  const auto p = make_problem(10, 8, 4);
  ASSERT_TRUE(p.rotation_a().has_value());
  Rng r(3);
  for (int i = 0; i < 50; ++i) {
    const VectorXd x = random_point(r, 4);
    const double expected = ellipsoid_reference(*p.rotation_a() * (x - p.x_opt())) + p.f_opt();
    EXPECT_NEAR(p(x), expected, 1e-9 * std::max(1.0, std::abs(expected)));
  }
}

TEST(Bbob, Precision) {
  const auto p = make_problem(1, 3, 2);
  EXPECT_EQ(precision(p, p.f_opt()), 0.0);
  EXPECT_NEAR(precision(p, p.f_opt() + 2.5), 2.5, 1e-12);
  EXPECT_EQ(precision(p, p.f_opt() - 1e-12), 0.0);
}

TEST(Bbob, Errors) {
  EXPECT_THROW(make_problem(0, 1, 5), InvalidArgument);
  EXPECT_THROW(make_problem(25, 1, 5), InvalidArgument);
  EXPECT_THROW(make_problem(1, 1, 1), InvalidArgument);
  const auto p = make_problem(1, 1, 5);
  EXPECT_THROW(p(VectorXd::Zero(4)), InvalidArgument);
}
