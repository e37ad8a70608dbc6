#include "elaxp/tree_shap.hpp"

#include <bit>
#include <cmath>
#include <set>

#include "elaxp/csv.hpp"
#include "elaxp/errors.hpp"

namespace elaxp {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double weight = 0.0;
};

using Path = std::vector<PathElement>;

void extend_path(Path& path, int depth, double zero_fraction, double one_fraction, int feature) {
  path.resize(static_cast<std::size_t>(depth) + 1);
  path[static_cast<std::size_t>(depth)] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    auto& cur = path[static_cast<std::size_t>(i)];
    path[static_cast<std::size_t>(i) + 1].weight += one_fraction * cur.weight * (i + 1) / (depth + 1.0);
    cur.weight = zero_fraction * cur.weight * (depth - i) / (depth + 1.0);
  }
}

void unwind_path(Path& path, int depth, int index) {
  const double one = path[static_cast<std::size_t>(index)].one_fraction;
  const double zero = path[static_cast<std::size_t>(index)].zero_fraction;
  double next = path[static_cast<std::size_t>(depth)].weight;
  for (int i = depth - 1; i >= 0; --i) {
    auto& cur = path[static_cast<std::size_t>(i)];
    if (one != 0.0) {
      const double tmp = cur.weight;
      cur.weight = next * (depth + 1.0) / ((i + 1.0) * one);
      next = tmp - cur.weight * zero * (depth - i) / (depth + 1.0);
    } else {
      cur.weight = cur.weight * (depth + 1.0) / (zero * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    auto& cur = path[static_cast<std::size_t>(i)];
    const auto& nxt = path[static_cast<std::size_t>(i) + 1];
    cur.feature = nxt.feature;
    cur.zero_fraction = nxt.zero_fraction;
    cur.one_fraction = nxt.one_fraction;
  }
  path.resize(static_cast<std::size_t>(depth));
}

double unwound_path_sum(const Path& path, int depth, int index) {
  const double one = path[static_cast<std::size_t>(index)].one_fraction;
  const double zero = path[static_cast<std::size_t>(index)].zero_fraction;
  double next = path[static_cast<std::size_t>(depth)].weight;
  double total = 0.0;
  for (int i = depth - 1; i >= 0; --i) {
    const double w = path[static_cast<std::size_t>(i)].weight;
    if (one != 0.0) {
      const double tmp = next * (depth + 1.0) / ((i + 1.0) * one);
      total += tmp;
      next = w - tmp * zero * (depth - i) / (depth + 1.0);
    } else if (zero != 0.0) {
      total += w / zero / ((depth - i) / (depth + 1.0));
    }
  }
  return total;
}

class ShapWalker {
 public:
  ShapWalker(const Tree& tree, std::span<const double> x, MatrixXd& phi) : tree_(tree), x_(x), phi_(phi) {}

  void run() { recurse(0, Path{}, 0, 1.0, 1.0, -1); }

 private:
  double cover(int id) const { return tree_.nodes()[static_cast<std::size_t>(id)].cover; }

  void recurse(int id, Path path, int depth, double zero_fraction, double one_fraction, int feature) {
    extend_path(path, depth, zero_fraction, one_fraction, feature);
    const auto& node = tree_.nodes()[static_cast<std::size_t>(id)];
    if (node.is_leaf()) {
      for (int i = 1; i <= depth; ++i) {
        const auto& el = path[static_cast<std::size_t>(i)];
        const double w = unwound_path_sum(path, depth, i) * (el.one_fraction - el.zero_fraction);
        for (std::size_t t = 0; t < node.value.size(); ++t) {
          phi_(el.feature, static_cast<Eigen::Index>(t)) += w * node.value[t];
        }
      }
      return;
    }
    const bool go_left = x_[static_cast<std::size_t>(node.feature)] <= node.threshold;
    const int hot = go_left ? node.left : node.right;
    const int cold = go_left ? node.right : node.left;

    double incoming_zero = 1.0;
    double incoming_one = 1.0;
    for (int k = 1; k <= depth; ++k) {
      if (path[static_cast<std::size_t>(k)].feature == node.feature) {
        incoming_zero = path[static_cast<std::size_t>(k)].zero_fraction;
        incoming_one = path[static_cast<std::size_t>(k)].one_fraction;
        unwind_path(path, depth, k);
        --depth;
        break;
      }
    }
    recurse(hot, path, depth + 1, cover(hot) / node.cover * incoming_zero, incoming_one, node.feature);
    recurse(cold, std::move(path), depth + 1, cover(cold) / node.cover * incoming_zero, 0.0, node.feature);
  }

  const Tree& tree_;
  std::span<const double> x_;
  MatrixXd& phi_;
};

void check_covers(const Tree& tree) {
  for (const auto& node : tree.nodes()) {
    if (!(node.cover > 0.0) || !std::isfinite(node.cover)) {
      throw InvalidState("tree node without a positive cover; SHAP values need training covers");
    }
  }
}

void check_input(const Tree& tree, std::span<const double> x) {
  if (static_cast<int>(x.size()) != tree.n_features()) {
    throw InvalidArgument("input has " + std::to_string(x.size()) + " features, tree expects " +
                          std::to_string(tree.n_features()));
  }
}

VectorXd leaf_vector(const Tree::Node& node) {
  return Eigen::Map<const VectorXd>(node.value.data(), static_cast<Eigen::Index>(node.value.size()));
}

// Value of the coalition `in` (one flag per feature): follow x on member
// features, split by cover fractions otherwise.
VectorXd coalition_value(const Tree& tree, std::span<const double> x, const std::vector<char>& in, int id) {
  const auto& node = tree.nodes()[static_cast<std::size_t>(id)];
  if (node.is_leaf()) return leaf_vector(node);
  if (in[static_cast<std::size_t>(node.feature)]) {
    const bool go_left = x[static_cast<std::size_t>(node.feature)] <= node.threshold;
    return coalition_value(tree, x, in, go_left ? node.left : node.right);
  }
  const auto& l = tree.nodes()[static_cast<std::size_t>(node.left)];
  const auto& r = tree.nodes()[static_cast<std::size_t>(node.right)];
  return l.cover / node.cover * coalition_value(tree, x, in, node.left) +
         r.cover / node.cover * coalition_value(tree, x, in, node.right);
}

std::vector<std::string> default_names(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

}  // namespace

VectorXd ShapExplanation::output() const { return base + phi.colwise().sum().transpose(); }

nlohmann::json ShapExplanation::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(phi.cols()));
    for (Eigen::Index t = 0; t < phi.cols(); ++t) r[static_cast<std::size_t>(t)] = phi(i, t);
    rows.push_back(r);
  }
  return {{"instance_id", instance_id},
          {"feature_names", feature_names},
          {"target_names", target_names},
          {"base", std::vector<double>(base.data(), base.data() + base.size())},
          {"phi", rows}};
}

ShapExplanation ShapExplanation::from_json(const nlohmann::json& j) {
  ShapExplanation e;
  e.instance_id = j.at("instance_id").get<std::string>();
  e.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  e.target_names = j.at("target_names").get<std::vector<std::string>>();
  const auto base = j.at("base").get<std::vector<double>>();
  e.base = Eigen::Map<const VectorXd>(base.data(), static_cast<Eigen::Index>(base.size()));
  const auto& rows = j.at("phi");
  e.phi.resize(static_cast<Eigen::Index>(rows.size()), e.base.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(r.size()) != e.base.size()) throw InvalidArgument("ragged phi matrix");
    for (std::size_t t = 0; t < r.size(); ++t) e.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = r[t];
  }
  return e;
}

std::string ShapExplanation::to_csv() const {
  std::vector<std::string> header{"feature"};
  for (const auto& t : target_names) header.push_back("phi_" + t);
  std::string out = csv::join(header) + "\n";
  std::vector<std::string> row{"(base)"};
  for (Eigen::Index t = 0; t < base.size(); ++t) row.push_back(csv::format_real(base(t)));
  out += csv::join(row) + "\n";
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    row.assign(1, feature_names[static_cast<std::size_t>(i)]);
    for (Eigen::Index t = 0; t < phi.cols(); ++t) row.push_back(csv::format_real(phi(i, t)));
    out += csv::join(row) + "\n";
  }
  return out;
}

VectorXd expected_value(const Tree& tree) {
  check_covers(tree);
  const std::vector<char> none(static_cast<std::size_t>(tree.n_features()), 0);
  const std::vector<double> x(static_cast<std::size_t>(tree.n_features()), 0.0);
  return coalition_value(tree, x, none, 0);
}

ShapExplanation shap_tree(const Tree& tree, std::span<const double> x) {
  check_input(tree, x);
  ShapExplanation e;
  e.base = expected_value(tree);
  e.phi = MatrixXd::Zero(tree.n_features(), tree.n_targets());
  ShapWalker(tree, x, e.phi).run();
  e.feature_names = default_names("x", tree.n_features());
  e.target_names = default_names("y", tree.n_targets());
  return e;
}

ShapExplanation shap_forest(const Forest& forest, std::span<const double> x, std::string instance_id) {
  ShapExplanation e;
  e.base = VectorXd::Zero(forest.n_targets());
  e.phi = MatrixXd::Zero(forest.n_features(), forest.n_targets());
  for (const auto& tree : forest.trees()) {
    const auto t = shap_tree(tree, x);
    e.base += t.base;
    e.phi += t.phi;
  }
  const auto n = static_cast<double>(forest.trees().size());
  e.base /= n;
  e.phi /= n;
  e.instance_id = std::move(instance_id);
  e.feature_names = forest.feature_names();
  e.target_names = forest.target_names();
  return e;
}

ShapExplanation brute_force_shap(const Tree& tree, std::span<const double> x) {
  check_input(tree, x);
  check_covers(tree);
  std::set<int> used_set;
  for (const auto& node : tree.nodes()) {
    if (!node.is_leaf()) used_set.insert(node.feature);
  }
  const std::vector<int> used(used_set.begin(), used_set.end());
  const auto u = static_cast<int>(used.size());
  if (u > 15) throw InvalidArgument("brute-force SHAP refuses trees using more than 15 features");

  const std::size_t subsets = std::size_t{1} << u;
  std::vector<VectorXd> value(subsets);
  std::vector<char> in(static_cast<std::size_t>(tree.n_features()), 0);
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    for (int k = 0; k < u; ++k) in[static_cast<std::size_t>(used[static_cast<std::size_t>(k)])] = (mask >> k) & 1U;
    value[mask] = coalition_value(tree, x, in, 0);
  }

  std::vector<double> factorial(static_cast<std::size_t>(u) + 1, 1.0);
  for (int k = 1; k <= u; ++k) factorial[static_cast<std::size_t>(k)] = factorial[static_cast<std::size_t>(k) - 1] * k;

  ShapExplanation e;
  e.base = value[0];
  e.phi = MatrixXd::Zero(tree.n_features(), tree.n_targets());
  for (int k = 0; k < u; ++k) {
    const std::size_t bit = std::size_t{1} << k;
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      if (mask & bit) continue;
      const int s = std::popcount(mask);
      const double w = factorial[static_cast<std::size_t>(s)] * factorial[static_cast<std::size_t>(u - s - 1)] /
                       factorial[static_cast<std::size_t>(u)];
      e.phi.row(used[static_cast<std::size_t>(k)]) += w * (value[mask | bit] - value[mask]).transpose();
    }
  }
  e.feature_names = default_names("x", tree.n_features());
  e.target_names = default_names("y", tree.n_targets());
  return e;
}

}  // namespace elaxp
