#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "elaxp/ela.hpp"
#include "elaxp/errors.hpp"
#include "elaxp/rng.hpp"
#include "elaxp/stats.hpp"
#include "ela_internal.hpp"

namespace elaxp::ela {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

FeatureVector conv(const Objective& f, const MatrixXd& points, const VectorXd& values, std::uint64_t seed,
                   int n_pairs) {
  internal::check_sample(points, values, "ela_conv");
  const Index n = points.rows();
  if (n < 2) throw InvalidArgument("ela_conv needs at least 2 points");
  if (n_pairs < 1) throw InvalidArgument("ela_conv needs n_pairs >= 1");
  constexpr double kTolerance = 1e-10;

  Rng rng(seed, {0xC0});
  int convex = 0, linear = 0;
  double deviation = 0.0;
  for (int k = 0; k < n_pairs; ++k) {
    const auto a = static_cast<Index>(rng.below(static_cast<std::size_t>(n)));
    auto b = static_cast<Index>(rng.below(static_cast<std::size_t>(n - 1)));
    if (b >= a) ++b;
    const VectorXd mid = 0.5 * (points.row(a) + points.row(b)).transpose();
    const double delta = f(mid) - 0.5 * (values(a) + values(b));
    convex += delta < -kTolerance;
    linear += std::abs(delta) <= kTolerance;
    deviation += delta;
  }
  const double total = n_pairs;
  FeatureVector out;
  out.add("ela_conv.conv_prob", FeatureGroup::ela_conv, convex / total);
  out.add("ela_conv.lin_prob", FeatureGroup::ela_conv, linear / total);
  out.add("ela_conv.lin_dev.orig", FeatureGroup::ela_conv, deviation / total);
  return out;
}

FeatureVector curv(const Objective& f, const MatrixXd& points, std::uint64_t seed, int subset_size,
                   double step) {
  const Index n = points.rows();
  const Index d = points.cols();
  if (n < 1) throw InvalidArgument("ela_curv needs at least one point");
  if (subset_size < 1) throw InvalidArgument("ela_curv needs subset_size >= 1");
  if (!(step > 0)) throw InvalidArgument("ela_curv needs a positive step");

  Rng rng(seed, {0xCC});
  auto order = rng.permutation(static_cast<std::size_t>(n));
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(subset_size)));

  std::vector<double> norms, scales, conds;
  const double h = step;
  for (auto idx : order) {
    const VectorXd x = points.row(static_cast<Index>(idx)).transpose();
    const double fx = f(x);
    VectorXd grad(d);
    MatrixXd hess(d, d);
    std::vector<double> up(static_cast<std::size_t>(d)), down(static_cast<std::size_t>(d));
    for (Index i = 0; i < d; ++i) {
      VectorXd xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      up[static_cast<std::size_t>(i)] = f(xp);
      down[static_cast<std::size_t>(i)] = f(xm);
      grad(i) = (up[static_cast<std::size_t>(i)] - down[static_cast<std::size_t>(i)]) / (2.0 * h);
      hess(i, i) = (up[static_cast<std::size_t>(i)] - 2.0 * fx + down[static_cast<std::size_t>(i)]) / (h * h);
    }
    for (Index i = 0; i < d; ++i) {
      for (Index j = i + 1; j < d; ++j) {
        auto at = [&](double si, double sj) {
          VectorXd y = x;
          y(i) += si * h;
          y(j) += sj * h;
          return f(y);
        };
        hess(i, j) = hess(j, i) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
      }
    }

    norms.push_back(grad.norm());
    const VectorXd ag = grad.cwiseAbs();
    if (ag.minCoeff() > 0) scales.push_back(ag.maxCoeff() / ag.minCoeff());
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(hess, Eigen::EigenvaluesOnly);
    const VectorXd ev = eig.eigenvalues().cwiseAbs();
    if (ev.minCoeff() > 0) conds.push_back(ev.maxCoeff() / ev.minCoeff());
  }

  constexpr auto g = FeatureGroup::ela_curv;
  FeatureVector out;
  auto emit = [&](const char* name, const std::vector<double>& v) {
    const std::string prefix = std::string("ela_curv.") + name;
    if (v.empty()) {
      for (const char* s : {".min", ".max", ".mean", ".sd"}) out.add(prefix + s, g, std::nullopt);
      return;
    }
    out.add(prefix + ".min", g, *std::min_element(v.begin(), v.end()));
    out.add(prefix + ".max", g, *std::max_element(v.begin(), v.end()));
    out.add(prefix + ".mean", g, stats::mean(v));
    out.add(prefix + ".sd", g, stats::sd(v));
  };
  emit("grad_norm", norms);
  emit("grad_scale", scales);
  emit("hessian_cond", conds);
  return out;
}

}  // namespace elaxp::ela
