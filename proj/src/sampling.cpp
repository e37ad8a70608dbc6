#include "elaxp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "elaxp/csv.hpp"
#include "elaxp/errors.hpp"
#include "elaxp/rng.hpp"

namespace elaxp {
namespace {

double squared_distance(const Eigen::MatrixXd& p, Eigen::Index a, Eigen::Index b) {
  return (p.row(a) - p.row(b)).squaredNorm();
}

double min_pairwise_squared(const Eigen::MatrixXd& p) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < p.rows(); ++j) best = std::min(best, squared_distance(p, i, j));
  }
  return best;
}

// Smallest squared distance from row r to every other row except `skip`.
double min_squared_from(const Eigen::MatrixXd& p, Eigen::Index r, Eigen::Index skip) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < p.rows(); ++k) {
    if (k == r || k == skip) continue;
    best = std::min(best, squared_distance(p, r, k));
  }
  return best;
}

}  // namespace

SampleSet lhs(int n, int dim, Bounds bounds, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("lhs needs n >= 2, got " + std::to_string(n));
  if (dim < 1) throw InvalidArgument("lhs needs dim >= 1, got " + std::to_string(dim));
  if (!(bounds.lower < bounds.upper)) throw InvalidArgument("lhs needs lower < upper");

  Rng rng(seed, {0x1A5});
  SampleSet s;
  s.bounds = bounds;
  s.seed = seed;
  s.points.resize(n, dim);
  const double width = bounds.upper - bounds.lower;
  for (int c = 0; c < dim; ++c) {
    const auto strata = rng.permutation(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) {
      const double u = (static_cast<double>(strata[r]) + rng.uniform()) / n;
      s.points(r, c) = bounds.lower + width * u;
    }
  }
  return s;
}

SampleSet improve_maximin(SampleSet design, int sweeps, std::uint64_t seed) {
  auto& p = design.points;
  const Eigen::Index n = p.rows();
  if (sweeps <= 0 || n < 3) return design;

  Rng rng(seed, {0x3A7});
  double current = min_pairwise_squared(p);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      const auto a = static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(n)));
      auto b = static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(n - 1)));
      if (b >= a) ++b;
      std::swap(p(a, c), p(b, c));
      // Only distances involving rows a and b change; the design's minimum
      // cannot drop iff none of them falls below the current minimum.
      const double touched = std::min({min_squared_from(p, a, -1), min_squared_from(p, b, a)});
      if (touched >= current) {
        current = min_pairwise_squared(p);
      } else {
        std::swap(p(a, c), p(b, c));
      }
    }
  }
  return design;
}

SampleSet sample_and_evaluate(const ProblemInstance& problem, int multiplier, std::uint64_t seed,
                              const SamplingOptions& options) {
  if (multiplier < 1) throw InvalidArgument("sample multiplier must be >= 1");
  const int n = multiplier * problem.dim();
  SampleSet s = improve_maximin(lhs(n, problem.dim(), options.bounds, seed), options.maximin_sweeps, seed);
  s.values.resize(n);
  Eigen::VectorXd x(problem.dim());
  for (int i = 0; i < n; ++i) {
    x = s.points.row(i).transpose();
    s.values(i) = problem.evaluate(x);
  }
  return s;
}

double min_pairwise_distance(const Eigen::MatrixXd& points) {
  return std::sqrt(min_pairwise_squared(points));
}

bool is_latin(const Eigen::MatrixXd& points, Bounds bounds) {
  const Eigen::Index n = points.rows();
  const double width = bounds.upper - bounds.lower;
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (Eigen::Index r = 0; r < n; ++r) {
      const double u = (points(r, c) - bounds.lower) / width;
      if (u < 0.0 || u > 1.0) return false;
      auto k = static_cast<Eigen::Index>(std::floor(u * static_cast<double>(n)));
      k = std::min(k, n - 1);
      if (seen[static_cast<std::size_t>(k)]) return false;
      seen[static_cast<std::size_t>(k)] = true;
    }
  }
  return true;
}

void write_sample_csv(std::ostream& out, const SampleSet& sample) {
  csv::Table t;
  for (Eigen::Index c = 0; c < sample.dim(); ++c) t.header.push_back("x" + std::to_string(c + 1));
  t.header.push_back("y");
  for (Eigen::Index r = 0; r < sample.size(); ++r) {
    std::vector<std::string> row;
    for (Eigen::Index c = 0; c < sample.dim(); ++c) row.push_back(csv::format_real(sample.points(r, c)));
    row.push_back(sample.evaluated() ? csv::format_real(sample.values(r)) : std::string{});
    t.rows.push_back(std::move(row));
  }
  csv::write_table(out, t);
}

SampleSet read_sample_csv(std::istream& in, Bounds bounds) {
  const auto t = csv::read_table(in);
  if (t.header.size() < 2 || t.header.back() != "y") {
    throw InvalidArgument("sample CSV must have columns x1..xD,y");
  }
  const auto dim = static_cast<Eigen::Index>(t.header.size() - 1);
  for (Eigen::Index c = 0; c < dim; ++c) {
    if (t.header[static_cast<std::size_t>(c)] != "x" + std::to_string(c + 1)) {
      throw InvalidArgument("sample CSV column " + std::to_string(c + 1) + " must be x" +
                            std::to_string(c + 1));
    }
  }
  SampleSet s;
  s.bounds = bounds;
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  s.points.resize(n, dim);
  Eigen::VectorXd values(n);
  Eigen::Index filled = 0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = t.rows[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < dim; ++c) {
      s.points(r, c) = csv::parse_real(row[static_cast<std::size_t>(c)], "sample CSV");
    }
    if (const auto y = csv::parse_optional(row.back(), "sample CSV")) {
      values(r) = *y;
      ++filled;
    }
  }
  if (filled == n) {
    s.values = values;
  } else if (filled != 0) {
    throw InvalidArgument("sample CSV has a partially filled y column");
  }
  return s;
}

}  // namespace elaxp
