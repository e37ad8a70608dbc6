#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace elaxp {

struct TsneOptions {
  double perplexity = 30.0;
  int iterations = 1000;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double learning_rate = 200.0;
  std::uint64_t seed = 0;
};

struct TsneResult {
  Eigen::MatrixXd embedding;  // n x 2
  double kl_after_exaggeration = 0.0;
  double kl_final = 0.0;
};

// Largest usable perplexity for n points: min(requested, just below (n-1)/3).
double clamp_perplexity(double requested, Eigen::Index n);

// Exact t-SNE. Requires n >= 4 and perplexity < (n-1)/3.
TsneResult tsne(const Eigen::MatrixXd& x, const TsneOptions& options = {});

}  // namespace elaxp
