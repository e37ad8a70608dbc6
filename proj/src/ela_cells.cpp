#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
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

struct Cell {
  std::vector<Index> coords;  // block index per dimension
  std::vector<Index> members;
};

// Points grouped by grid cell, ordered by cell id.
std::map<long long, Cell> assign_cells(const MatrixXd& points, Bounds bounds, int blocks) {
  if (blocks < 1) throw InvalidArgument("blocks_per_dim must be >= 1");
  const double width = (bounds.upper - bounds.lower) / blocks;
  std::map<long long, Cell> cells;
  for (Index r = 0; r < points.rows(); ++r) {
    long long id = 0;
    std::vector<Index> coords(static_cast<std::size_t>(points.cols()));
    for (Index c = 0; c < points.cols(); ++c) {
      auto b = static_cast<Index>(std::floor((points(r, c) - bounds.lower) / width));
      b = std::clamp<Index>(b, 0, blocks - 1);
      coords[static_cast<std::size_t>(c)] = b;
      id = id * blocks + b;
    }
    auto& cell = cells[id];
    cell.coords = std::move(coords);
    cell.members.push_back(r);
  }
  return cells;
}

VectorXd cell_centre(const Cell& cell, Bounds bounds, int blocks) {
  const double width = (bounds.upper - bounds.lower) / blocks;
  VectorXd c(static_cast<Index>(cell.coords.size()));
  for (std::size_t i = 0; i < cell.coords.size(); ++i) {
    c(static_cast<Index>(i)) = bounds.lower + (static_cast<double>(cell.coords[i]) + 0.5) * width;
  }
  return c;
}

// Mean and sd across cells; one cell gives sd 0.
std::pair<std::optional<double>, std::optional<double>> summarise(const std::vector<double>& v) {
  if (v.empty()) return {std::nullopt, std::nullopt};
  return {stats::mean(v), stats::sd(v)};
}

}  // namespace

FeatureVector cm_angle(const MatrixXd& points, const VectorXd& values, Bounds bounds, int blocks_per_dim) {
  internal::check_sample(points, values, "cm_angle");
  const auto cells = assign_cells(points, bounds, blocks_per_dim);
  const double y_range = values.maxCoeff() - values.minCoeff();

  std::vector<double> to_best, to_worst, angle, y_ratio;
  for (const auto& [id, cell] : cells) {
    if (cell.members.size() < 2) continue;
    Index best = cell.members.front(), worst = cell.members.front();
    for (Index m : cell.members) {
      if (values(m) < values(best)) best = m;
      if (values(m) > values(worst)) worst = m;
    }
    const VectorXd centre = cell_centre(cell, bounds, blocks_per_dim);
    const VectorXd vb = points.row(best).transpose() - centre;
    const VectorXd vw = points.row(worst).transpose() - centre;
    const double nb = vb.norm();
    const double nw = vw.norm();
    if (nb == 0 || nw == 0) continue;
    to_best.push_back(nb);
    to_worst.push_back(nw);
    const double cosine = std::clamp(vb.dot(vw) / (nb * nw), -1.0, 1.0);
    angle.push_back(std::acos(cosine) * 180.0 / std::numbers::pi);
    if (y_range > 0) y_ratio.push_back((values(worst) - values(best)) / y_range);
  }

  constexpr auto g = FeatureGroup::cm_angle;
  FeatureVector out;
  auto emit = [&](const char* name, const std::vector<double>& v) {
    const auto [mean, sd] = summarise(v);
    out.add(std::string("cm_angle.") + name + ".mean", g, mean);
    out.add(std::string("cm_angle.") + name + ".sd", g, sd);
  };
  emit("dist_ctr2best", to_best);
  emit("dist_ctr2worst", to_worst);
  emit("angle", angle);
  emit("y_ratio_best2worst", y_ratio);
  return out;
}

FeatureVector cm_grad(const MatrixXd& points, const VectorXd& values, Bounds bounds, int blocks_per_dim) {
  internal::check_sample(points, values, "cm_grad");
  const auto cells = assign_cells(points, bounds, blocks_per_dim);

  std::vector<double> homogeneity;
  for (const auto& [id, cell] : cells) {
    const auto& m = cell.members;
    if (m.size() < 2) continue;
    VectorXd sum = VectorXd::Zero(points.cols());
    for (Index a : m) {
      Index nearest = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index b : m) {
        if (b == a) continue;
        const double d = (points.row(a) - points.row(b)).squaredNorm();
        if (d < best) {
          best = d;
          nearest = b;
        }
      }
      if (best == 0) continue;
      // Unit vector from the worse towards the better of the pair.
      VectorXd dir = points.row(nearest).transpose() - points.row(a).transpose();
      if (values(nearest) >= values(a)) dir = -dir;
      sum += dir / dir.norm();
    }
    homogeneity.push_back(sum.norm() / static_cast<double>(m.size()));
  }

  const auto [mean, sd] = summarise(homogeneity);
  FeatureVector out;
  out.add("cm_grad.grad_homo.mean", FeatureGroup::cm_grad, mean);
  out.add("cm_grad.grad_homo.sd", FeatureGroup::cm_grad, sd);
  return out;
}

}  // namespace elaxp::ela
