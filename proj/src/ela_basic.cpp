#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "elaxp/ela.hpp"
#include "elaxp/errors.hpp"
#include "elaxp/stats.hpp"
#include "ela_internal.hpp"

namespace elaxp::ela {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kKdeGrid = 512;

// Bandwidth after R's bw.nrd0 (Silverman's rule of thumb).
double silverman_bandwidth(std::span<const double> v) {
  const double s = stats::sd(v);
  const double iqr = stats::quantile(v, 0.75) - stats::quantile(v, 0.25);
  double lo = std::min(s, iqr / 1.34);
  if (lo <= 0) lo = s;
  if (lo <= 0) lo = std::abs(v[0]);
  if (lo <= 0) lo = 1.0;
  return 0.9 * lo * std::pow(static_cast<double>(v.size()), -0.2);
}

int count_kde_peaks(std::span<const double> v) {
  const double h = silverman_bandwidth(v);
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it - 3.0 * h;
  const double hi = *hi_it + 3.0 * h;
  std::vector<double> density(kKdeGrid, 0.0);
  for (int g = 0; g < kKdeGrid; ++g) {
    const double at = lo + (hi - lo) * g / (kKdeGrid - 1);
    for (double x : v) {
      const double u = (at - x) / h;
      density[g] += std::exp(-0.5 * u * u);
    }
  }
  const double top = *std::max_element(density.begin(), density.end());
  int peaks = 0;
  for (int g = 1; g + 1 < kKdeGrid; ++g) {
    if (density[g] > density[g - 1] && density[g] > density[g + 1] && density[g] > 0.1 * top) ++peaks;
  }
  return peaks;
}

struct LinearFit {
  VectorXd coef;  // intercept first
  double adj_r2;
};

// Ordinary least squares with an intercept column already in `design`.
std::optional<LinearFit> least_squares(const MatrixXd& design, const VectorXd& y) {
  const Index n = design.rows();
  const Index p = design.cols() - 1;
  if (n <= p + 1) return std::nullopt;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
  if (qr.rank() < design.cols()) return std::nullopt;
  LinearFit fit;
  fit.coef = qr.solve(y);
  const double rss = (y - design * fit.coef).squaredNorm();
  const double tss = (y.array() - y.mean()).square().sum();
  if (tss <= 0) return std::nullopt;
  const double r2 = 1.0 - rss / tss;
  fit.adj_r2 = 1.0 - (1.0 - r2) * static_cast<double>(n - 1) / static_cast<double>(n - p - 1);
  return fit;
}

MatrixXd meta_design(const MatrixXd& x, bool squares, bool interactions) {
  const Index n = x.rows();
  const Index d = x.cols();
  const Index pairs = interactions ? d * (d - 1) / 2 : 0;
  MatrixXd m(n, 1 + d + (squares ? d : 0) + pairs);
  m.col(0).setOnes();
  m.middleCols(1, d) = x;
  Index c = 1 + d;
  if (squares) {
    m.middleCols(c, d) = x.array().square().matrix();
    c += d;
  }
  if (interactions) {
    for (Index i = 0; i < d; ++i) {
      for (Index j = i + 1; j < d; ++j) m.col(c++) = x.col(i).cwiseProduct(x.col(j));
    }
  }
  return m;
}

std::optional<double> adj_r2_of(const std::optional<LinearFit>& f) {
  if (!f) return std::nullopt;
  return f->adj_r2;
}

}  // namespace

FeatureVector distr(const VectorXd& values) {
  const Index n = values.size();
  if (n < 4) throw InvalidArgument("ela_distr needs at least 4 values");
  const std::span<const double> v(values.data(), static_cast<std::size_t>(n));
  const double m = values.mean();
  const VectorXd c = values.array() - m;
  const double m2 = c.array().square().mean();
  const double m3 = c.array().cube().mean();
  const double m4 = c.array().square().square().mean();

  FeatureVector out;
  std::optional<double> skew, kurt;
  if (m2 > 0) {
    skew = m3 / std::pow(m2, 1.5);
    kurt = m4 / (m2 * m2) - 3.0;
  }
  out.add("ela_distr.skewness", FeatureGroup::ela_distr, skew);
  out.add("ela_distr.kurtosis", FeatureGroup::ela_distr, kurt);
  out.add("ela_distr.number_of_peaks", FeatureGroup::ela_distr, count_kde_peaks(v));
  return out;
}

FeatureVector meta(const MatrixXd& points, const VectorXd& values) {
  internal::check_sample(points, values, "ela_meta");
  const Index d = points.cols();
  const auto lin = least_squares(meta_design(points, false, false), values);
  const auto lin_inter = least_squares(meta_design(points, false, true), values);
  const auto quad = least_squares(meta_design(points, true, false), values);
  const auto quad_inter = least_squares(meta_design(points, true, true), values);

  std::optional<double> intercept, cmin, cmax, ratio;
  if (lin) {
    intercept = lin->coef(0);
    const VectorXd slopes = lin->coef.segment(1, d).cwiseAbs();
    cmin = slopes.minCoeff();
    cmax = slopes.maxCoeff();
    if (*cmin > 0) ratio = *cmax / *cmin;
  }
  std::optional<double> cond;
  if (quad) {
    const VectorXd q = quad->coef.segment(1 + d, d).cwiseAbs();
    if (q.minCoeff() > 0) cond = q.maxCoeff() / q.minCoeff();
  }

  constexpr auto g = FeatureGroup::ela_meta;
  FeatureVector out;
  out.add("ela_meta.lin_simple.adj_r2", g, adj_r2_of(lin));
  out.add("ela_meta.lin_simple.intercept", g, intercept);
  out.add("ela_meta.lin_simple.coef.min", g, cmin);
  out.add("ela_meta.lin_simple.coef.max", g, cmax);
  out.add("ela_meta.lin_simple.coef.max_by_min", g, ratio);
  out.add("ela_meta.lin_w_interact.adj_r2", g, adj_r2_of(lin_inter));
  out.add("ela_meta.quad_simple.adj_r2", g, adj_r2_of(quad));
  out.add("ela_meta.quad_simple.cond", g, cond);
  out.add("ela_meta.quad_w_interact.adj_r2", g, adj_r2_of(quad_inter));
  return out;
}

FeatureVector disp(const MatrixXd& points, const VectorXd& values, std::span<const double> quantiles) {
  internal::check_sample(points, values, "disp");
  const Index n = points.rows();
  const MatrixXd dist = internal::distance_matrix(points);

  // Best-first order; ties resolved by sample index.
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values(a) < values(b); });

  auto pair_distances = [&](Index k) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k * (k - 1) / 2));
    for (Index i = 0; i < k; ++i) {
      for (Index j = i + 1; j < k; ++j) out.push_back(dist(order[i], order[j]));
    }
    return out;
  };
  const auto all = pair_distances(n);
  const double all_mean = stats::mean(all);
  const double all_median = stats::median(all);

  std::vector<double> ratio_mean, ratio_median, diff_mean, diff_median;
  for (double q : quantiles) {
    const auto k = static_cast<Index>(std::ceil(q * static_cast<double>(n) - 1e-9));
    if (k < 2 || k > n) {
      throw InvalidArgument("disp quantile " + std::to_string(q) + " selects fewer than 2 points");
    }
    const auto best = pair_distances(k);
    const double bm = stats::mean(best);
    const double bmed = stats::median(best);
    ratio_mean.push_back(bm / all_mean);
    ratio_median.push_back(bmed / all_median);
    diff_mean.push_back(bm - all_mean);
    diff_median.push_back(bmed - all_median);
  }

  FeatureVector out;
  auto emit = [&](const char* stat, const std::vector<double>& v) {
    for (std::size_t i = 0; i < quantiles.size(); ++i) {
      out.add(std::string("disp.") + stat + "_" + internal::percent_label(quantiles[i]),
              FeatureGroup::disp, v[i]);
    }
  };
  emit("ratio_mean", ratio_mean);
  emit("ratio_median", ratio_median);
  emit("diff_mean", diff_mean);
  emit("diff_median", diff_median);
  return out;
}

}  // namespace elaxp::ela
