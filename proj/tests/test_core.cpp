#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "elaxp/csv.hpp"
#include "elaxp/errors.hpp"
#include "elaxp/rng.hpp"
#include "elaxp/stats.hpp"

using namespace elaxp;

TEST(Rng, SameSeedSameStream) {
  Rng a(42, {1, 2});
  Rng b(42, {1, 2});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, StreamsDiffer) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t k = 0; k < 50; ++k) seeds.insert(derive_seed(7, {k}));
  EXPECT_EQ(seeds.size(), 50u);
  EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
}

TEST(Rng, UniformAndBelowRanges) {
  Rng r(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const auto k = r.below(7);
    ASSERT_LT(k, 7u);
    ++hits[k];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, NormalMoments) {
  Rng r(11);
  double s = 0, ss = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    ss += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(ss / n, 1.0, 0.02);
}

TEST(Rng, PermutationIsPermutation) {
  Rng r(5);
  auto p = r.permutation(100);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i], i);
}

TEST(Stats, MedianOddEven) {
  const std::vector<double> odd{3, 1, 2};
  const std::vector<double> even{1, 2, 3, 4, 5, 6, 7, 8, 9, 100};
  EXPECT_EQ(stats::median(odd), 2.0);
  EXPECT_EQ(stats::median(even), 5.5);
  EXPECT_THROW(stats::median(std::vector<double>{}), InvalidArgument);
}

TEST(Stats, QuantileType7) {
  const std::vector<double> v{1, 2, 3, 4};
  // h = 0.25 * 3 = 0.75 -> 1 + 0.75 * (2 - 1)
  EXPECT_DOUBLE_EQ(stats::quantile(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(stats::quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(stats::quantile(v, 1.0), 4.0);
}

TEST(Stats, SdAndCorrelation) {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_NEAR(stats::sd(v), std::sqrt(32.0 / 7.0), 1e-12);
  EXPECT_EQ(stats::sd(std::vector<double>{1.0}), 0.0);
  const std::vector<double> a{1, 2, 3}, b{2, 4, 6}, c{5, 5, 5};
  EXPECT_NEAR(*stats::correlation(a, b), 1.0, 1e-12);
  EXPECT_FALSE(stats::correlation(a, c).has_value());
}

TEST(Csv, RealsRoundTrip) {
  Rng r(9);
  for (int i = 0; i < 2000; ++i) {
    const double v = (r.uniform() - 0.5) * std::pow(10.0, r.uniform(-30, 30));
    EXPECT_EQ(csv::parse_real(csv::format_real(v), "test"), v);
  }
  EXPECT_EQ(csv::format_optional(std::nullopt), "");
  EXPECT_FALSE(csv::parse_optional("", "test").has_value());
  EXPECT_THROW(csv::parse_real("abc", "test"), InvalidArgument);
  EXPECT_THROW(csv::parse_integer("1.5", "test"), InvalidArgument);
}

TEST(Csv, TableRoundTripAndErrors) {
  csv::Table t;
  t.header = {"a", "b"};
  t.rows = {{"1", "x"}, {"2", ""}};
  std::stringstream s;
  csv::write_table(s, t);
  const auto back = csv::read_table(s);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.column("b"), 1u);
  EXPECT_THROW(back.column("c"), InvalidArgument);

  std::stringstream ragged("a,b\n1\n");
  EXPECT_THROW(csv::read_table(ragged), InvalidArgument);
  EXPECT_THROW(csv::join({"a,b"}), InvalidArgument);
}

TEST(Csv, AtomicWrite) {
  const auto dir = std::filesystem::temp_directory_path() / "elaxp_core_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "out.txt";
  csv::write_file_atomic(path, "first");
  csv::write_file_atomic(path, "second");
  EXPECT_EQ(csv::read_file(path), "second");
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files += e.is_regular_file();
  EXPECT_EQ(files, 1u);
  std::filesystem::remove_all(dir);
}
