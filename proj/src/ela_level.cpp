#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "elaxp/ela.hpp"
#include "elaxp/errors.hpp"
#include "elaxp/rng.hpp"
#include "elaxp/stats.hpp"
#include "ela_internal.hpp"

namespace elaxp::ela {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kFolds = 5;
constexpr double kRidge = 1e-6;

// Covariance with a diagonal ridge when it is singular or numerically so.
struct Gaussian {
  Eigen::LDLT<MatrixXd> solver;
  double log_det = 0.0;
};

Gaussian factor(MatrixXd cov) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  const VectorXd ev = eig.eigenvalues();
  if (ev.minCoeff() <= 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff())) {
    cov.diagonal().array() += kRidge;
  }
  Gaussian g;
  g.solver.compute(cov);
  g.log_det = g.solver.vectorD().array().abs().log().sum();
  return g;
}

struct ClassStats {
  Index count = 0;
  VectorXd mean;
  MatrixXd scatter;  // sum of centred outer products
};

std::array<ClassStats, 2> class_stats(const MatrixXd& x, const std::vector<int>& labels,
                                      const std::vector<Index>& rows) {
  std::array<ClassStats, 2> s;
  const Index d = x.cols();
  for (auto& c : s) {
    c.mean = VectorXd::Zero(d);
    c.scatter = MatrixXd::Zero(d, d);
  }
  for (Index r : rows) {
    auto& c = s[static_cast<std::size_t>(labels[static_cast<std::size_t>(r)])];
    ++c.count;
    c.mean += x.row(r).transpose();
  }
  for (auto& c : s) {
    if (c.count > 0) c.mean /= static_cast<double>(c.count);
  }
  for (Index r : rows) {
    auto& c = s[static_cast<std::size_t>(labels[static_cast<std::size_t>(r)])];
    const VectorXd dev = x.row(r).transpose() - c.mean;
    c.scatter += dev * dev.transpose();
  }
  return s;
}

struct CvErrors {
  double lda;
  double qda;
};

CvErrors cross_validate(const MatrixXd& x, const std::vector<int>& labels, Rng& rng) {
  const Index n = x.rows();

  // Stratified fold assignment.
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<Index> members;
    for (Index i = 0; i < n; ++i) {
      if (labels[static_cast<std::size_t>(i)] == cls) members.push_back(i);
    }
    rng.shuffle(members);
    for (std::size_t k = 0; k < members.size(); ++k) {
      fold[static_cast<std::size_t>(members[k])] = static_cast<int>(k % kFolds);
    }
  }

  Index lda_wrong = 0, qda_wrong = 0;
  for (int f = 0; f < kFolds; ++f) {
    std::vector<Index> train, test;
    for (Index i = 0; i < n; ++i) (fold[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    if (test.empty()) continue;
    const auto cs = class_stats(x, labels, train);
    const auto ntrain = static_cast<double>(train.size());

    const Index dof = std::max<Index>(1, static_cast<Index>(train.size()) - 2);
    const Gaussian pooled = factor((cs[0].scatter + cs[1].scatter) / static_cast<double>(dof));
    std::array<std::optional<Gaussian>, 2> per_class;
    for (int c = 0; c < 2; ++c) {
      if (cs[c].count == 0) continue;
      const double denom = static_cast<double>(std::max<Index>(1, cs[c].count - 1));
      per_class[c] = factor(cs[c].scatter / denom);
    }

    for (Index r : test) {
      const VectorXd xr = x.row(r).transpose();
      double best_lda = -std::numeric_limits<double>::infinity();
      double best_qda = best_lda;
      int lda_class = 0, qda_class = 0;
      for (int c = 0; c < 2; ++c) {
        if (cs[c].count == 0) continue;
        const double log_prior = std::log(static_cast<double>(cs[c].count) / ntrain);
        const VectorXd sm = pooled.solver.solve(cs[c].mean);
        const double lda = xr.dot(sm) - 0.5 * cs[c].mean.dot(sm) + log_prior;
        const VectorXd dev = xr - cs[c].mean;
        const double qda =
            -0.5 * per_class[c]->log_det - 0.5 * dev.dot(per_class[c]->solver.solve(dev)) + log_prior;
        if (lda > best_lda) best_lda = lda, lda_class = c;
        if (qda > best_qda) best_qda = qda, qda_class = c;
      }
      const int truth = labels[static_cast<std::size_t>(r)];
      lda_wrong += lda_class != truth;
      qda_wrong += qda_class != truth;
    }
  }
  return {static_cast<double>(lda_wrong) / static_cast<double>(n),
          static_cast<double>(qda_wrong) / static_cast<double>(n)};
}

}  // namespace

FeatureVector level(const MatrixXd& points, const VectorXd& values, std::uint64_t seed,
                    std::span<const double> quantiles) {
  internal::check_sample(points, values, "ela_level");
  const Index n = points.rows();
  if (n < 20) throw InvalidArgument("ela_level needs at least 20 points");
  const std::span<const double> v(values.data(), static_cast<std::size_t>(n));

  FeatureVector out;
  for (std::size_t qi = 0; qi < quantiles.size(); ++qi) {
    const double threshold = stats::quantile(v, quantiles[qi]);
    std::vector<int> labels(static_cast<std::size_t>(n));
    Index positives = 0;
    for (Index i = 0; i < n; ++i) {
      labels[static_cast<std::size_t>(i)] = values(i) <= threshold ? 1 : 0;
      positives += labels[static_cast<std::size_t>(i)];
    }
    std::optional<double> lda, qda, ratio;
    if (positives > 0 && positives < n) {
      Rng rng(seed, {qi});
      const auto e = cross_validate(points, labels, rng);
      lda = e.lda;
      qda = e.qda;
      if (e.qda > 0) ratio = e.lda / e.qda;
    }
    const auto p = internal::percent_label(quantiles[qi]);
    out.add("ela_level.mmce_lda_" + p, FeatureGroup::ela_level, lda);
    out.add("ela_level.mmce_qda_" + p, FeatureGroup::ela_level, qda);
    out.add("ela_level.lda_qda_" + p, FeatureGroup::ela_level, ratio);
  }
  return out;
}

}  // namespace elaxp::ela
