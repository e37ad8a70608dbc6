#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
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

FeatureVector nbc(const MatrixXd& points, const VectorXd& values) {
  internal::check_sample(points, values, "nbc");
  const Index n = points.rows();
  if (n < 3) throw InvalidArgument("nbc needs at least 3 points");

  constexpr auto g = FeatureGroup::nbc;
  FeatureVector out;
  if (values.maxCoeff() == values.minCoeff()) {
    for (const char* f : {"nn_nb.sd_ratio", "nn_nb.mean_ratio", "nn_nb.cor", "dist_ratio.coeff_var",
                          "nb_fitness.cor"}) {
      out.add(std::string("nbc.") + f, g, std::nullopt);
    }
    return out;
  }

  const MatrixXd dist = internal::distance_matrix(points);
  const double max_dist = dist.maxCoeff();
  std::vector<double> nn(static_cast<std::size_t>(n)), nb(static_cast<std::size_t>(n));
  std::vector<double> indegree(static_cast<std::size_t>(n), 0.0);
  for (Index i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    double nearest_better = std::numeric_limits<double>::infinity();
    Index better_idx = -1;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      nearest = std::min(nearest, dist(i, j));
      if (values(j) < values(i) && dist(i, j) < nearest_better) {
        nearest_better = dist(i, j);
        better_idx = j;
      }
    }
    nn[static_cast<std::size_t>(i)] = nearest;
    if (better_idx < 0) {
      // Global best: no strictly better point exists.
      nb[static_cast<std::size_t>(i)] = max_dist;
    } else {
      nb[static_cast<std::size_t>(i)] = nearest_better;
      indegree[static_cast<std::size_t>(better_idx)] += 1.0;
    }
  }

  std::optional<double> sd_ratio;
  if (const double s = stats::sd(nb); s > 0) sd_ratio = stats::sd(nn) / s;
  const double mean_ratio = stats::mean(nn) / stats::mean(nb);

  std::vector<double> ratios;
  for (std::size_t i = 0; i < nn.size(); ++i) {
    if (nb[i] > 0) ratios.push_back(nn[i] / nb[i]);
  }
  std::optional<double> coeff_var;
  if (ratios.size() >= 2) coeff_var = stats::sd(ratios) / stats::mean(ratios);

  const std::span<const double> y(values.data(), static_cast<std::size_t>(n));
  out.add("nbc.nn_nb.sd_ratio", g, sd_ratio);
  out.add("nbc.nn_nb.mean_ratio", g, mean_ratio);
  out.add("nbc.nn_nb.cor", g, stats::correlation(nn, nb));
  out.add("nbc.dist_ratio.coeff_var", g, coeff_var);
  out.add("nbc.nb_fitness.cor", g, stats::correlation(indegree, y));
  return out;
}

namespace detail {

const std::vector<double>& ic_epsilon_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g{0.0};
    constexpr int kSteps = 1000;
    for (int i = 0; i < kSteps; ++i) g.push_back(std::pow(10.0, -5.0 + 20.0 * i / (kSteps - 1)));
    return g;
  }();
  return grid;
}

std::vector<int> ic_symbols(std::span<const double> ratios, double eps) {
  std::vector<int> s(ratios.size());
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    s[i] = ratios[i] > eps ? 1 : (ratios[i] < -eps ? -1 : 0);
  }
  return s;
}

double ic_entropy(std::span<const int> symbols) {
  if (symbols.size() < 2) return 0.0;
  double counts[3][3] = {};
  for (std::size_t i = 0; i + 1 < symbols.size(); ++i) counts[symbols[i] + 1][symbols[i + 1] + 1] += 1.0;
  const double total = static_cast<double>(symbols.size() - 1);
  double h = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (a == b || counts[a][b] == 0) continue;
      const double p = counts[a][b] / total;
      h -= p * std::log(p) / std::log(6.0);
    }
  }
  return h;
}

double ic_partial_information(std::span<const int> symbols) {
  if (symbols.empty()) return 0.0;
  std::size_t runs = 0;
  int last = 0;
  for (int s : symbols) {
    if (s == 0 || s == last) continue;
    ++runs;
    last = s;
  }
  return static_cast<double>(runs) / static_cast<double>(symbols.size());
}

FeatureVector ic_from_ratios(std::span<const double> ratios) {
  const auto& grid = ic_epsilon_grid();
  std::vector<double> h(grid.size()), m(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto s = ic_symbols(ratios, grid[k]);
    h[k] = ic_entropy(s);
    m[k] = ic_partial_information(s);
  }
  // Epsilons are reported as log10; epsilon = 0 maps onto the first positive
  // grid value so every reported value is finite.
  auto log_eps = [&](std::size_t k) { return std::log10(std::max(grid[k], grid[1])); };

  const auto argmax = static_cast<std::size_t>(std::max_element(h.begin(), h.end()) - h.begin());
  std::optional<double> eps_s;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (h[k] < 0.05) {
      eps_s = log_eps(k);
      break;
    }
  }
  const double m0 = m[0];
  std::optional<double> eps_ratio;
  if (m0 > 0) {
    for (std::size_t k = grid.size(); k-- > 0;) {
      if (m[k] > 0.5 * m0) {
        eps_ratio = log_eps(k);
        break;
      }
    }
  }

  constexpr auto g = FeatureGroup::ic;
  FeatureVector out;
  out.add("ic.h.max", g, h[argmax]);
  out.add("ic.eps.s", g, eps_s);
  out.add("ic.eps.max", g, log_eps(argmax));
  out.add("ic.eps.ratio", g, eps_ratio);
  out.add("ic.m0", g, m0);
  return out;
}

std::vector<Index> nearest_neighbour_tour(const MatrixXd& points, Index start) {
  const Index n = points.rows();
  std::vector<bool> visited(static_cast<std::size_t>(n), false);
  std::vector<Index> tour{start};
  visited[static_cast<std::size_t>(start)] = true;
  Index current = start;
  for (Index step = 1; step < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    Index next = -1;
    for (Index j = 0; j < n; ++j) {
      if (visited[static_cast<std::size_t>(j)]) continue;
      const double d = (points.row(current) - points.row(j)).squaredNorm();
      if (d < best) {
        best = d;
        next = j;
      }
    }
    visited[static_cast<std::size_t>(next)] = true;
    tour.push_back(next);
    current = next;
  }
  return tour;
}

}  // namespace detail

FeatureVector ic(const MatrixXd& points, const VectorXd& values, std::uint64_t seed) {
  internal::check_sample(points, values, "ic");
  const Index n = points.rows();
  if (n < 10) throw InvalidArgument("ic needs at least 10 points");
  Rng rng(seed, {0x1C});
  const auto start = static_cast<Index>(rng.below(static_cast<std::size_t>(n)));
  const auto tour = detail::nearest_neighbour_tour(points, start);

  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(n - 1));
  for (std::size_t k = 0; k + 1 < tour.size(); ++k) {
    const double step = (points.row(tour[k + 1]) - points.row(tour[k])).norm();
    if (step == 0) continue;
    ratios.push_back((values(tour[k + 1]) - values(tour[k])) / step);
  }
  return detail::ic_from_ratios(ratios);
}

}  // namespace elaxp::ela
