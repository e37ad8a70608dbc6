#include "elaxp/tsne.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "elaxp/errors.hpp"
#include "elaxp/rng.hpp"

namespace elaxp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Row-conditional Gaussian affinities whose entropy matches log(perplexity).
MatrixXd conditional_affinities(const MatrixXd& d2, double perplexity) {
  const Index n = d2.rows();
  const double target = std::log(perplexity);
  MatrixXd p = MatrixXd::Zero(n, n);
  VectorXd row(n);
  for (Index i = 0; i < n; ++i) {
    double beta = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 200; ++step) {
      double sum = 0.0;
      double weighted = 0.0;
      for (Index j = 0; j < n; ++j) {
        row(j) = j == i ? 0.0 : std::exp(-d2(i, j) * beta);
        sum += row(j);
        weighted += d2(i, j) * row(j);
      }
      if (sum <= 0.0) sum = std::numeric_limits<double>::min();
      const double entropy = std::log(sum) + beta * weighted / sum;
      row /= sum;
      const double diff = entropy - target;
      if (std::abs(diff) < 1e-10) break;
      if (diff > 0.0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
      } else {
        hi = beta;
        beta = (beta + lo) / 2.0;
      }
    }
    p.row(i) = row.transpose();
  }
  return p;
}

double kl_divergence(const MatrixXd& p, const MatrixXd& q) {
  double kl = 0.0;
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index j = 0; j < p.cols(); ++j) {
      if (i != j && p(i, j) > 0.0) kl += p(i, j) * std::log(p(i, j) / q(i, j));
    }
  }
  return kl;
}

}  // namespace

double clamp_perplexity(double requested, Index n) {
  const double limit = (static_cast<double>(n) - 1.0) / 3.0;
  return requested < limit ? requested : std::nextafter(limit, 0.0);
}

TsneResult tsne(const MatrixXd& x, const TsneOptions& o) {
  const Index n = x.rows();
  if (n < 4) throw InvalidArgument("t-SNE needs at least 4 points");
  if (!(o.perplexity > 0.0) || o.perplexity >= (static_cast<double>(n) - 1.0) / 3.0) {
    throw InvalidArgument("perplexity " + std::to_string(o.perplexity) + " must be positive and below (n-1)/3 = " +
                          std::to_string((static_cast<double>(n) - 1.0) / 3.0));
  }
  if (o.iterations < 1 || o.exaggeration_iterations < 0 || o.exaggeration_iterations > o.iterations) {
    throw InvalidArgument("t-SNE iteration counts are inconsistent");
  }

  MatrixXd d2(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) d2(i, j) = (x.row(i) - x.row(j)).squaredNorm();
  }
  const MatrixXd cond = conditional_affinities(d2, o.perplexity);
  MatrixXd p = (cond + cond.transpose()) / (2.0 * static_cast<double>(n));
  p = p.cwiseMax(1e-12);
  p.diagonal().setZero();

  Rng rng(o.seed, {0x75E});
  MatrixXd y(n, 2);
  for (Index i = 0; i < n; ++i) {
    y(i, 0) = 1e-4 * rng.normal();
    y(i, 1) = 1e-4 * rng.normal();
  }
  MatrixXd update = MatrixXd::Zero(n, 2);
  MatrixXd gains = MatrixXd::Ones(n, 2);
  MatrixXd num(n, n), q(n, n), grad(n, 2);

  auto affinities = [&] {
    double sum = 0.0;
    for (Index i = 0; i < n; ++i) {
      num(i, i) = 0.0;
      for (Index j = i + 1; j < n; ++j) {
        const double v = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
        num(i, j) = v;
        num(j, i) = v;
        sum += 2.0 * v;
      }
    }
    q = (num / sum).cwiseMax(1e-12);
  };

  TsneResult result;
  for (int it = 0; it < o.iterations; ++it) {
    const bool early = it < o.exaggeration_iterations;
    const double exaggeration = early ? o.early_exaggeration : 1.0;
    const double momentum = early ? 0.5 : 0.8;
    affinities();
    for (Index i = 0; i < n; ++i) {
      Eigen::RowVector2d g = Eigen::RowVector2d::Zero();
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        g += (exaggeration * p(i, j) - q(i, j)) * num(i, j) * (y.row(i) - y.row(j));
      }
      grad.row(i) = 4.0 * g;
    }
    for (Index i = 0; i < n; ++i) {
      for (Index c = 0; c < 2; ++c) {
        const bool same_sign = (grad(i, c) > 0.0) == (update(i, c) > 0.0);
        gains(i, c) = std::max(same_sign ? gains(i, c) * 0.8 : gains(i, c) + 0.2, 0.01);
        update(i, c) = momentum * update(i, c) - o.learning_rate * gains(i, c) * grad(i, c);
        y(i, c) += update(i, c);
      }
    }
    y.rowwise() -= y.colwise().mean();
    if (it + 1 == o.exaggeration_iterations) {
      affinities();
      result.kl_after_exaggeration = kl_divergence(p, q);
    }
  }
  affinities();
  result.kl_final = kl_divergence(p, q);
  if (o.exaggeration_iterations == 0) result.kl_after_exaggeration = result.kl_final;
  result.embedding = y;
  return result;
}

}  // namespace elaxp
