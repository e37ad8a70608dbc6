#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/Dense>

#include "elaxp/errors.hpp"

namespace elaxp::ela::internal {

// "02" for 0.02, "25" for 0.25, "100" for 1.0.
inline std::string percent_label(double q) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02ld", std::lround(q * 100.0));
  return buf;
}

// Full symmetric Euclidean distance matrix between rows.
inline Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& p) {
  const Eigen::Index n = p.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (p.row(i) - p.row(j)).norm();
    }
  }
  return d;
}

inline void check_sample(const Eigen::MatrixXd& points, const Eigen::VectorXd& values, const char* who) {
  if (points.rows() != values.size()) {
    throw InvalidArgument(std::string(who) + ": points and values have different row counts");
  }
}

}  // namespace elaxp::ela::internal
