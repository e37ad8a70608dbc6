#include "elaxp/bbob.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "elaxp/errors.hpp"
#include "elaxp/rng.hpp"

namespace elaxp {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kPi = std::numbers::pi;

bool uses_rotation_a(int fid) {
  switch (fid) {
    case 6: case 7: case 9: case 10: case 11: case 12: case 13: case 14: case 15:
    case 16: case 17: case 18: case 19: case 21: case 22: case 23: case 24:
      return true;
    default:
      return false;
  }
}

bool uses_rotation_b(int fid) {
  switch (fid) {
    case 6: case 7: case 13: case 15: case 16: case 17: case 18: case 23: case 24:
      return true;
    default:
      return false;
  }
}

// Diagonal of the conditioning matrix: alpha^(i / (2 (D - 1))).
VectorXd conditioning(double alpha, int dim) {
  VectorXd d(dim);
  for (int i = 0; i < dim; ++i) d(i) = std::pow(alpha, 0.5 * i / (dim - 1));
  return d;
}

double oscillate(double x) {
  if (x == 0.0) return 0.0;
  const double xh = std::log(std::abs(x));
  const double c1 = x > 0 ? 10.0 : 5.5;
  const double c2 = x > 0 ? 7.9 : 3.1;
  return std::copysign(std::exp(xh + 0.049 * (std::sin(c1 * xh) + std::sin(c2 * xh))), x);
}

VectorXd oscillate(VectorXd x) {
  for (auto& v : x) v = oscillate(v);
  return x;
}

VectorXd asymmetric(VectorXd x, double beta) {
  const auto dim = x.size();
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (x(i) > 0) {
      x(i) = std::pow(x(i), 1.0 + beta * static_cast<double>(i) / static_cast<double>(dim - 1) *
                                      std::sqrt(x(i)));
    }
  }
  return x;
}

double boundary_penalty(const VectorXd& x) {
  double p = 0.0;
  for (double v : x) {
    const double excess = std::abs(v) - 5.0;
    if (excess > 0) p += excess * excess;
  }
  return p;
}

double rastrigin_core(const VectorXd& z) {
  double cos_sum = 0.0;
  for (double v : z) cos_sum += std::cos(2.0 * kPi * v);
  return 10.0 * (static_cast<double>(z.size()) - cos_sum) + z.squaredNorm();
}

double rosenbrock_core(const VectorXd& z) {
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < z.size(); ++i) {
    const double a = z(i) * z(i) - z(i + 1);
    const double b = z(i) - 1.0;
    s += 100.0 * a * a + b * b;
  }
  return s;
}

double rosenbrock_scale(int dim) { return std::max(1.0, std::sqrt(static_cast<double>(dim)) / 8.0); }

double sign_of(double v) { return v < 0 ? -1.0 : 1.0; }

double schaffer_core(const VectorXd& z) {
  const auto dim = z.size();
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < dim; ++i) {
    const double si = std::sqrt(z(i) * z(i) + z(i + 1) * z(i + 1));
    const double root = std::sqrt(si);
    const double wave = std::sin(50.0 * std::pow(si, 0.2));
    s += root + root * wave * wave;
  }
  s /= static_cast<double>(dim - 1);
  return s * s;
}

double weierstrass_term(double z) {
  double s = 0.0;
  double half_k = 1.0;
  double three_k = 1.0;
  for (int k = 0; k < 12; ++k) {
    s += half_k * std::cos(2.0 * kPi * three_k * (z + 0.5));
    half_k *= 0.5;
    three_k *= 3.0;
  }
  return s;
}

// Lunacek bi-Rastrigin constants.
constexpr double kLunacekMu0 = 2.5;

}  // namespace

Eigen::MatrixXd random_rotation(int dim, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd g(dim, dim);
  for (int c = 0; c < dim; ++c) {
    for (int r = 0; r < dim; ++r) g(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(dim, dim);
  const MatrixXd& packed = qr.matrixQR();
  for (int c = 0; c < dim; ++c) {
    if (packed(c, c) < 0) q.col(c) *= -1.0;
  }
  return q;
}

ProblemInstance make_problem(int function_id, std::uint64_t instance_seed, int dim) {
  if (function_id < 1 || function_id > kNumFunctions) {
    throw InvalidArgument("function_id must be in 1..24, got " + std::to_string(function_id));
  }
  if (dim < 2) throw InvalidArgument("dim must be >= 2, got " + std::to_string(dim));

  ProblemInstance p;
  p.function_id_ = function_id;
  p.dim_ = dim;
  p.instance_seed_ = instance_seed;

  Rng rng(instance_seed, {static_cast<std::uint64_t>(function_id), static_cast<std::uint64_t>(dim)});
  p.f_opt_ = std::round(rng.uniform(-100.0, 100.0) * 100.0) / 100.0;
  VectorXd raw(dim);
  for (int i = 0; i < dim; ++i) raw(i) = rng.uniform(-4.0, 4.0);
  const std::uint64_t seed_a = rng.next();
  const std::uint64_t seed_b = rng.next();
  if (uses_rotation_a(function_id)) p.rotation_a_ = random_rotation(dim, seed_a);
  if (uses_rotation_b(function_id)) p.rotation_b_ = random_rotation(dim, seed_b);

  switch (function_id) {
    case 4:
      p.x_opt_ = raw;
      for (int i = 0; i < dim; i += 2) p.x_opt_(i) = std::abs(raw(i));
      break;
    case 5:
      p.x_opt_ = raw.unaryExpr([](double v) { return 5.0 * sign_of(v); });
      break;
    case 8:
      p.x_opt_ = 0.75 * raw;
      break;
    case 9:
    case 19:
      p.x_opt_ = p.rotation_a_->transpose() *
                 VectorXd::Constant(dim, 0.5 / rosenbrock_scale(dim));
      break;
    case 20:
      p.x_opt_ = raw.unaryExpr([](double v) { return sign_of(v) * 4.2096874633 / 2.0; });
      break;
    case 21:
    case 22: {
      const bool many = function_id == 21;
      const int peaks = many ? 101 : 21;
      const double spread = many ? 5.0 : 4.9;
      const double first_spread = many ? 4.0 : 3.92;
      const double top_alpha = many ? 1000.0 : 1.0e6;
      const int pool = peaks - 1;
      Rng peak_rng(rng.next());

      p.peak_centres_.resize(dim, peaks);
      p.peak_conditioning_.resize(dim, peaks);
      p.peak_weights_.resize(peaks);
      const auto alpha_order = peak_rng.permutation(static_cast<std::size_t>(pool));
      for (int k = 0; k < peaks; ++k) {
        const double s = k == 0 ? first_spread : spread;
        for (int i = 0; i < dim; ++i) p.peak_centres_(i, k) = peak_rng.uniform(-s, s);
        const double alpha =
            k == 0 ? top_alpha
                   : std::pow(1000.0, 2.0 * static_cast<double>(alpha_order[k - 1]) / (pool - 1));
        VectorXd diag = conditioning(alpha, dim);
        peak_rng.shuffle(std::span<double>(diag.data(), static_cast<std::size_t>(dim)));
        p.peak_conditioning_.col(k) = diag / std::pow(alpha, 0.25);
        p.peak_weights_(k) = k == 0 ? 10.0 : 1.1 + 8.0 * (k - 1) / (peaks - 2);
      }
      p.x_opt_ = p.peak_centres_.col(0);
      break;
    }
    case 24:
      p.x_opt_ = raw.unaryExpr([](double v) { return sign_of(v) * kLunacekMu0 / 2.0; });
      break;
    default:
      p.x_opt_ = raw;
  }
  return p;
}

double ProblemInstance::evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) {
    throw InvalidArgument("point has dimension " + std::to_string(x.size()) + ", problem has " +
                          std::to_string(dim_));
  }
  const int d = dim_;
  const double dd = static_cast<double>(d);
  const VectorXd shifted = x - x_opt_;
  auto R = [&](const VectorXd& v) -> VectorXd { return *rotation_a_ * v; };
  auto Q = [&](const VectorXd& v) -> VectorXd { return *rotation_b_ * v; };
  auto exponent = [&](int i, double top) { return std::pow(10.0, top * i / (d - 1)); };

  double f = 0.0;
  switch (function_id_) {
    case 1:
      f = shifted.squaredNorm();
      break;
    case 2: {
      const VectorXd z = oscillate(shifted);
      for (int i = 0; i < d; ++i) f += exponent(i, 6.0) * z(i) * z(i);
      break;
    }
    case 3: {
      const VectorXd z = conditioning(10.0, d).cwiseProduct(asymmetric(oscillate(shifted), 0.2));
      f = rastrigin_core(z);
      break;
    }
    case 4: {
      VectorXd z = oscillate(shifted);
      const VectorXd scale = conditioning(10.0, d);
      for (int i = 0; i < d; ++i) {
        const double s = (z(i) > 0 && i % 2 == 0) ? 10.0 * scale(i) : scale(i);
        z(i) *= s;
      }
      f = rastrigin_core(z) + 100.0 * boundary_penalty(x);
      break;
    }
    case 5: {
      for (int i = 0; i < d; ++i) {
        const double z = x_opt_(i) * x(i) < 25.0 ? x(i) : x_opt_(i);
        const double s = sign_of(x_opt_(i)) * exponent(i, 1.0);
        f += 5.0 * std::abs(s) - s * z;
      }
      break;
    }
    case 6: {
      const VectorXd z = Q(conditioning(10.0, d).cwiseProduct(R(shifted)));
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        const double scaled = (z(i) * x_opt_(i) > 0 ? 100.0 : 1.0) * z(i);
        s += scaled * scaled;
      }
      f = std::pow(oscillate(s), 0.9);
      break;
    }
    case 7: {
      const VectorXd zh = conditioning(10.0, d).cwiseProduct(R(shifted));
      VectorXd zt(d);
      for (int i = 0; i < d; ++i) {
        zt(i) = std::abs(zh(i)) > 0.5 ? std::floor(0.5 + zh(i)) : std::floor(0.5 + 10.0 * zh(i)) / 10.0;
      }
      const VectorXd z = Q(zt);
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += exponent(i, 2.0) * z(i) * z(i);
      f = 0.1 * std::max(std::abs(zh(0)) / 1.0e4, s) + boundary_penalty(x);
      break;
    }
    case 8: {
      const VectorXd z = rosenbrock_scale(d) * shifted + VectorXd::Ones(d);
      f = rosenbrock_core(z);
      break;
    }
    case 9: {
      const VectorXd z = rosenbrock_scale(d) * R(x) + VectorXd::Constant(d, 0.5);
      f = rosenbrock_core(z);
      break;
    }
    case 10: {
      const VectorXd z = oscillate(R(shifted));
      for (int i = 0; i < d; ++i) f += exponent(i, 6.0) * z(i) * z(i);
      break;
    }
    case 11: {
      const VectorXd z = oscillate(R(shifted));
      f = 1.0e6 * z(0) * z(0) + z.tail(d - 1).squaredNorm();
      break;
    }
    case 12: {
      const VectorXd z = R(asymmetric(R(shifted), 0.5));
      f = z(0) * z(0) + 1.0e6 * z.tail(d - 1).squaredNorm();
      break;
    }
    case 13: {
      const VectorXd z = Q(conditioning(10.0, d).cwiseProduct(R(shifted)));
      f = z(0) * z(0) + 100.0 * std::sqrt(z.tail(d - 1).squaredNorm());
      break;
    }
    case 14: {
      const VectorXd z = R(shifted);
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += std::pow(std::abs(z(i)), 2.0 + 4.0 * i / (d - 1));
      f = std::sqrt(s);
      break;
    }
    case 15: {
      const VectorXd z =
          R(conditioning(10.0, d).cwiseProduct(Q(asymmetric(oscillate(R(shifted)), 0.2))));
      f = rastrigin_core(z);
      break;
    }
    case 16: {
      const VectorXd z = R(conditioning(0.01, d).cwiseProduct(Q(oscillate(R(shifted)))));
      const double f0 = weierstrass_term(0.0);
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += weierstrass_term(z(i));
      const double inner = s / dd - f0;
      f = 10.0 * inner * inner * inner + 10.0 / dd * boundary_penalty(x);
      break;
    }
    case 17:
    case 18: {
      const double alpha = function_id_ == 17 ? 10.0 : 1000.0;
      const VectorXd z = conditioning(alpha, d).cwiseProduct(Q(asymmetric(R(shifted), 0.5)));
      f = schaffer_core(z) + 10.0 * boundary_penalty(x);
      break;
    }
    case 19: {
      const VectorXd z = rosenbrock_scale(d) * R(x) + VectorXd::Constant(d, 0.5);
      double s = 0.0;
      for (int i = 0; i + 1 < d; ++i) {
        const double a = z(i) * z(i) - z(i + 1);
        const double b = z(i) - 1.0;
        const double si = 100.0 * a * a + b * b;
        s += si / 4000.0 - std::cos(si);
      }
      f = 10.0 / (dd - 1.0) * s + 10.0;
      break;
    }
    case 20: {
      const VectorXd two_abs = 2.0 * x_opt_.cwiseAbs();
      VectorXd xh(d);
      for (int i = 0; i < d; ++i) xh(i) = 2.0 * sign_of(x_opt_(i)) * x(i);
      VectorXd zh = xh;
      for (int i = 1; i < d; ++i) zh(i) = xh(i) + 0.25 * (xh(i - 1) - two_abs(i - 1));
      const VectorXd z = 100.0 * (conditioning(10.0, d).cwiseProduct(zh - two_abs) + two_abs);
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += z(i) * std::sin(std::sqrt(std::abs(z(i))));
      f = -s / (100.0 * dd) + 4.189828872724339 + 100.0 * boundary_penalty(z / 100.0);
      break;
    }
    case 21:
    case 22: {
      double best = 0.0;
      for (Eigen::Index k = 0; k < peak_weights_.size(); ++k) {
        const VectorXd u = R(x - peak_centres_.col(k));
        const double q = peak_conditioning_.col(k).dot(u.cwiseProduct(u));
        best = std::max(best, peak_weights_(k) * std::exp(-q / (2.0 * dd)));
      }
      const double o = oscillate(10.0 - best);
      f = o * o + boundary_penalty(x);
      break;
    }
    case 23: {
      const VectorXd z = Q(conditioning(100.0, d).cwiseProduct(R(shifted)));
      const double expo = 10.0 / std::pow(dd, 1.2);
      double prod = 1.0;
      for (int i = 0; i < d; ++i) {
        double s = 0.0;
        double two_j = 2.0;
        for (int j = 1; j <= 32; ++j) {
          const double v = two_j * z(i);
          s += std::abs(v - std::nearbyint(v)) / two_j;
          two_j *= 2.0;
        }
        prod *= std::pow(1.0 + (i + 1) * s, expo);
      }
      const double scale = 10.0 / (dd * dd);
      f = scale * prod - scale + boundary_penalty(x);
      break;
    }
    case 24: {
      const double s = 1.0 - 1.0 / (2.0 * std::sqrt(dd + 20.0) - 8.2);
      const double mu1 = -std::sqrt((kLunacekMu0 * kLunacekMu0 - 1.0) / s);
      VectorXd xh(d);
      for (int i = 0; i < d; ++i) xh(i) = 2.0 * sign_of(x_opt_(i)) * x(i);
      const VectorXd z = Q(conditioning(100.0, d).cwiseProduct(R(xh - VectorXd::Constant(d, kLunacekMu0))));
      const double first = (xh.array() - kLunacekMu0).square().sum();
      const double second = dd + s * (xh.array() - mu1).square().sum();
      double cos_sum = 0.0;
      for (double v : z) cos_sum += std::cos(2.0 * kPi * v);
      f = std::min(first, second) + 10.0 * (dd - cos_sum) + 1.0e4 * boundary_penalty(x);
      break;
    }
    default:
      throw InvalidState("unknown function id");
  }
  return f + f_opt_;
}

double evaluate(const ProblemInstance& problem, const Eigen::VectorXd& x) { return problem.evaluate(x); }

double precision(const ProblemInstance& problem, double y_best) {
  return std::max(0.0, y_best - problem.f_opt());
}

}  // namespace elaxp
