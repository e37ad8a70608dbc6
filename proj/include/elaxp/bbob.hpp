#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace elaxp {

inline constexpr int kNumFunctions = 24;

// One noiseless BBOB-style function with a seeded instance transformation
// (shift, rotations, optimum value). Immutable once built.
class ProblemInstance {
 public:
  int function_id() const { return function_id_; }
  int dim() const { return dim_; }
  std::uint64_t instance_seed() const { return instance_seed_; }
  const Eigen::VectorXd& x_opt() const { return x_opt_; }
  double f_opt() const { return f_opt_; }
  // Present only for functions whose definition rotates the search space.
  const std::optional<Eigen::MatrixXd>& rotation_a() const { return rotation_a_; }
  const std::optional<Eigen::MatrixXd>& rotation_b() const { return rotation_b_; }

  // Throws InvalidArgument on a dimension mismatch.
  double evaluate(const Eigen::VectorXd& x) const;
  double operator()(const Eigen::VectorXd& x) const { return evaluate(x); }

  // True when evaluate(x_opt) equals f_opt up to rounding. False only for f20,
  // whose optimum location is a numerical constant.
  bool has_exact_optimum() const { return function_id_ != 20; }

 private:
  friend ProblemInstance make_problem(int function_id, std::uint64_t instance_seed, int dim);
  ProblemInstance() = default;

  int function_id_ = 0;
  int dim_ = 0;
  std::uint64_t instance_seed_ = 0;
  Eigen::VectorXd x_opt_;
  double f_opt_ = 0.0;
  std::optional<Eigen::MatrixXd> rotation_a_;
  std::optional<Eigen::MatrixXd> rotation_b_;

  // Gallagher peaks (f21, f22): one column per peak.
  Eigen::MatrixXd peak_centres_;
  Eigen::MatrixXd peak_conditioning_;
  Eigen::VectorXd peak_weights_;
};

// Deterministic in (function_id, instance_seed, dim). Requires 1 <= function_id
// <= 24 and dim >= 2.
ProblemInstance make_problem(int function_id, std::uint64_t instance_seed, int dim);

double evaluate(const ProblemInstance& problem, const Eigen::VectorXd& x);

// Error to optimum, clamped at zero.
double precision(const ProblemInstance& problem, double y_best);

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
// of R's diagonal folded into Q.
Eigen::MatrixXd random_rotation(int dim, std::uint64_t seed);

}  // namespace elaxp
