#include <gtest/gtest.h>

#include "elaxp/errors.hpp"
#include "elaxp/rng.hpp"
#include "elaxp/tsne.hpp"

using namespace elaxp;
using Eigen::MatrixXd;

namespace {

MatrixXd two_blobs(int per_blob, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd x(2 * per_blob, 5);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double centre = i < per_blob ? 0.0 : 10.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(i, c) = centre + rng.normal();
  }
  return x;
}

TsneOptions quick(double perplexity) {
  TsneOptions o;
  o.perplexity = perplexity;
  o.iterations = 400;
  o.exaggeration_iterations = 100;
  o.seed = 3;
  return o;
}

}  // namespace

TEST(Tsne, ShapeAndKlDecreases) {
  const auto x = two_blobs(10, 1);
  const auto r = tsne(x, quick(5));
  EXPECT_EQ(r.embedding.rows(), 20);
  EXPECT_EQ(r.embedding.cols(), 2);
  EXPECT_TRUE(r.embedding.allFinite());
  EXPECT_LE(r.kl_final, r.kl_after_exaggeration);
  EXPECT_GE(r.kl_final, 0.0);
}

TEST(Tsne, SeparatesBlobs) {
  const auto r = tsne(two_blobs(10, 2), quick(5));
  const Eigen::RowVector2d a = r.embedding.topRows(10).colwise().mean();
  const Eigen::RowVector2d b = r.embedding.bottomRows(10).colwise().mean();
  double spread = 0;
  for (int i = 0; i < 20; ++i) spread = std::max(spread, (r.embedding.row(i) - (i < 10 ? a : b)).norm());
  EXPECT_GT((a - b).norm(), spread);
}

TEST(Tsne, DuplicatesLandTogether) {
  auto x = two_blobs(8, 3);
  x.row(5) = x.row(2);
  const auto r = tsne(x, quick(4));
  double min_other = 1e300;
  for (int i = 0; i < x.rows(); ++i) {
    if (i != 2 && i != 5) min_other = std::min(min_other, (r.embedding.row(2) - r.embedding.row(i)).norm());
  }
  EXPECT_LT((r.embedding.row(2) - r.embedding.row(5)).norm(), min_other);
}

TEST(Tsne, DeterministicAndTranslationInvariant) {
  const auto x = two_blobs(7, 4);
  const auto a = tsne(x, quick(3));
  EXPECT_EQ(a.embedding, tsne(x, quick(3)).embedding);
  // Integer coordinates keep every pairwise distance exact under the shift.
  const MatrixXd grid = (x * 4).array().round().matrix();
  MatrixXd shifted = grid;
  shifted.array() += 3.0;
  EXPECT_EQ(tsne(shifted, quick(3)).embedding, tsne(grid, quick(3)).embedding);
}

TEST(Tsne, PerplexityLimits) {
  const auto x = two_blobs(5, 5);  // n = 10, bound 3
  EXPECT_THROW(tsne(x, quick(3.0)), InvalidArgument);
  EXPECT_THROW(tsne(x, quick(30)), InvalidArgument);
  const double p = clamp_perplexity(30, 10);
  EXPECT_LT(p, 3.0);
  EXPECT_GT(p, 2.999);
  EXPECT_NO_THROW(tsne(x, quick(p)));
  EXPECT_EQ(clamp_perplexity(2, 10), 2.0);
  EXPECT_THROW(tsne(MatrixXd::Zero(3, 2), quick(0.5)), InvalidArgument);
}
