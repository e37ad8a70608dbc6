#pragma once

#include <cstdint>
#include <iosfwd>

#include <Eigen/Dense>

#include "elaxp/bbob.hpp"

namespace elaxp {

// Box bounds, shared by every dimension.
struct Bounds {
  double lower = -5.0;
  double upper = 5.0;
};

// Search points (one per row) and, once evaluated, their objective values.
struct SampleSet {
  Eigen::MatrixXd points;
  Eigen::VectorXd values;  // empty until evaluated
  Bounds bounds;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
  bool evaluated() const { return values.size() == points.rows(); }
};

struct SamplingOptions {
  int maximin_sweeps = 1000;
  Bounds bounds;
};

// Plain Latin hypercube: one point per 1/n stratum in every column.
SampleSet lhs(int n, int dim, Bounds bounds, std::uint64_t seed);

// Swap-based maximin local search. One sweep proposes one within-column swap
// per dimension; a swap is kept iff the minimum pairwise distance does not
// decrease. Preserves the Latin property.
SampleSet improve_maximin(SampleSet design, int sweeps, std::uint64_t seed);

// Improved LHS of multiplier * dim points over the problem domain, evaluated.
SampleSet sample_and_evaluate(const ProblemInstance& problem, int multiplier, std::uint64_t seed,
                              const SamplingOptions& options = {});

double min_pairwise_distance(const Eigen::MatrixXd& points);
bool is_latin(const Eigen::MatrixXd& points, Bounds bounds);

// CSV with columns x1..xD, y (y empty when unevaluated).
void write_sample_csv(std::ostream& out, const SampleSet& sample);
SampleSet read_sample_csv(std::istream& in, Bounds bounds = {});

}  // namespace elaxp
