#include "elaxp/forest.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <string>

#include "elaxp/errors.hpp"
#include "elaxp/parallel.hpp"
#include "elaxp/rng.hpp"
#include "elaxp/stats.hpp"

namespace elaxp {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;

// Scores within this relative distance of the incumbent count as ties, so
// rounding in the running sums cannot overturn the tie-break order.
constexpr double kTieTolerance = 1e-12;

// Running sum of absolute deviations from the median over a growing multiset
// whose members are known in advance (each has a distinct rank).
class DeviationTracker {
 public:
  void reset(std::span<const double> sorted) {
    sorted_ = sorted;
    n_ = sorted.size();
    count_.assign(n_ + 1, 0);
    sum_.assign(n_ + 1, 0.0);
    size_ = 0;
    total_ = 0.0;
    top_bit_ = n_ == 0 ? 0 : std::bit_floor(n_);
  }

  // Inserts the member with the given rank and returns the new deviation sum.
  double insert(std::size_t rank) {
    const double v = sorted_[rank];
    for (std::size_t i = rank + 1; i <= n_; i += i & (~i + 1)) {
      count_[i] += 1;
      sum_[i] += v;
    }
    ++size_;
    total_ += v;

    // Locate the lower median, the ((size+1)/2)-th smallest member.
    std::size_t want = (size_ + 1) / 2;
    std::size_t pos = 0;
    std::size_t below = 0;
    double below_sum = 0.0;
    for (std::size_t step = top_bit_; step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next <= n_ && count_[next] < want) {
        pos = next;
        want -= count_[next];
        below += count_[next];
        below_sum += sum_[next];
      }
    }
    const double med = sorted_[pos];
    const auto lower = static_cast<double>(below + 1);
    const double lower_sum = below_sum + med;
    const auto upper = static_cast<double>(size_) - lower;
    return (med * lower - lower_sum) + ((total_ - lower_sum) - med * upper);
  }

 private:
  std::span<const double> sorted_;
  std::size_t n_ = 0;
  std::size_t top_bit_ = 0;
  std::vector<std::size_t> count_;
  std::vector<double> sum_;
  std::size_t size_ = 0;
  double total_ = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const MatrixXd& x, const MatrixXd& y, const TreeParams& params, std::uint64_t seed)
      : x_(x), y_(y), params_(params), rng_(seed, {0x7EE}) {}

  Tree build(std::vector<int> rows) {
    grow(std::move(rows), 0);
    return Tree(std::move(nodes_), static_cast<int>(x_.cols()), static_cast<int>(y_.cols()));
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();
  };

  int grow(std::vector<int> rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[id].cover = static_cast<double>(rows.size());

    const auto n = rows.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    Split split;
    if (depth < params_.max_depth && n >= 2 * min_leaf && !pure(rows)) split = find_split(rows);

    if (split.feature < 0) {
      nodes_[id].value = leaf_value(rows);
      return id;
    }
    std::vector<int> left, right;
    for (int r : rows) (x_(r, split.feature) <= split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = nodes_[id];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  bool pure(const std::vector<int>& rows) const {
    for (Index t = 0; t < y_.cols(); ++t) {
      const double first = y_(rows.front(), t);
      for (int r : rows) {
        if (y_(r, t) != first) return false;
      }
    }
    return true;
  }

  std::vector<double> leaf_value(const std::vector<int>& rows) const {
    std::vector<double> out(static_cast<std::size_t>(y_.cols()));
    std::vector<double> col(rows.size());
    for (Index t = 0; t < y_.cols(); ++t) {
      for (std::size_t i = 0; i < rows.size(); ++i) col[i] = y_(rows[i], t);
      out[static_cast<std::size_t>(t)] = stats::median(col);
    }
    return out;
  }

  std::vector<int> candidate_features() {
    const auto total = static_cast<int>(x_.cols());
    int k = total;
    if (params_.max_features < 1.0) {
      k = std::clamp(static_cast<int>(params_.max_features * total), 1, total);
    }
    std::vector<int> f(static_cast<std::size_t>(total));
    std::iota(f.begin(), f.end(), 0);
    if (k < total) {
      for (int i = 0; i < k; ++i) {
        const auto j = i + static_cast<int>(rng_.below(static_cast<std::size_t>(total - i)));
        std::swap(f[static_cast<std::size_t>(i)], f[static_cast<std::size_t>(j)]);
      }
      f.resize(static_cast<std::size_t>(k));
      std::sort(f.begin(), f.end());
    }
    return f;
  }

  Split find_split(const std::vector<int>& rows) {
    const std::size_t n = rows.size();
    const auto m = static_cast<std::size_t>(y_.cols());
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);

    // Per target: values sorted ascending and each row position's rank.
    sorted_.assign(m, std::vector<double>(n));
    rank_.assign(m, std::vector<std::size_t>(n));
    std::vector<std::size_t> idx(n);
    for (std::size_t t = 0; t < m; ++t) {
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return y_(rows[a], static_cast<Index>(t)) < y_(rows[b], static_cast<Index>(t));
      });
      for (std::size_t k = 0; k < n; ++k) {
        sorted_[t][k] = y_(rows[idx[k]], static_cast<Index>(t));
        rank_[t][idx[k]] = k;
      }
    }

    Split best;
    std::vector<std::size_t> order(n);
    std::vector<double> fx(n), score(n + 1), prefix(n + 1), suffix(n + 1);
    for (int f : candidate_features()) {
      for (std::size_t i = 0; i < n; ++i) fx[i] = x_(rows[i], f);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
      if (fx[order.front()] == fx[order.back()]) continue;

      std::fill(score.begin(), score.end(), 0.0);
      for (std::size_t t = 0; t < m; ++t) {
        tracker_.reset(sorted_[t]);
        for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = tracker_.insert(rank_[t][order[k]]);
        tracker_.reset(sorted_[t]);
        for (std::size_t k = 0; k < n; ++k) suffix[k + 1] = tracker_.insert(rank_[t][order[n - 1 - k]]);
        for (std::size_t k = 1; k < n; ++k) score[k] += prefix[k] + suffix[n - k];
      }
      for (std::size_t k = std::max<std::size_t>(min_leaf, 1); k + min_leaf <= n; ++k) {
        const double lo = fx[order[k - 1]];
        const double hi = fx[order[k]];
        if (!(lo < hi)) continue;
        if (best.feature < 0 || score[k] < best.score * (1.0 - kTieTolerance)) {
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best = {f, mid, score[k]};
        }
      }
    }
    return best;
  }

  const MatrixXd& x_;
  const MatrixXd& y_;
  TreeParams params_;
  Rng rng_;
  std::vector<Tree::Node> nodes_;
  std::vector<std::vector<double>> sorted_;
  std::vector<std::vector<std::size_t>> rank_;
  DeviationTracker tracker_;
};

void check_training_data(const MatrixXd& x, const MatrixXd& y) {
  if (x.rows() == 0 || x.cols() == 0 || y.cols() == 0) throw InvalidArgument("empty training data");
  if (x.rows() != y.rows()) throw InvalidArgument("feature and target matrices have different row counts");
  if (x.hasNaN()) throw InvalidArgument("feature matrix has missing values");
  if (y.hasNaN()) throw InvalidArgument("target matrix has missing values");
}

void check_tree_params(const TreeParams& p) {
  if (p.max_depth < 0) throw InvalidArgument("max_depth must be >= 0");
  if (p.min_samples_leaf < 1) throw InvalidArgument("min_samples_leaf must be >= 1");
  if (!(p.max_features > 0.0 && p.max_features <= 1.0)) throw InvalidArgument("max_features must be in (0, 1]");
}

}  // namespace

Tree::Tree(std::vector<Node> nodes, int n_features, int n_targets)
    : nodes_(std::move(nodes)), n_features_(n_features), n_targets_(n_targets) {
  if (nodes_.empty()) throw InvalidArgument("tree needs at least one node");
  const auto count = static_cast<int>(nodes_.size());
  for (const auto& node : nodes_) {
    if (node.is_leaf()) {
      if (static_cast<int>(node.value.size()) != n_targets_) {
        throw InvalidArgument("leaf value length differs from target count");
      }
    } else {
      if (node.feature >= n_features_) throw InvalidArgument("split feature out of range");
      if (node.left <= 0 || node.left >= count || node.right <= 0 || node.right >= count) {
        throw InvalidArgument("child index out of range");
      }
    }
  }
}

int Tree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    deepest = std::max(deepest, d[i]);
    if (!node.is_leaf()) {
      d[static_cast<std::size_t>(node.left)] = d[i] + 1;
      d[static_cast<std::size_t>(node.right)] = d[i] + 1;
    }
  }
  return deepest;
}

int Tree::leaf_for(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_features_) {
    throw InvalidArgument("input has " + std::to_string(x.size()) + " features, tree expects " +
                          std::to_string(n_features_));
  }
  int i = 0;
  while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
    const auto& node = nodes_[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return i;
}

const std::vector<double>& Tree::predict(std::span<const double> x) const {
  return nodes_[static_cast<std::size_t>(leaf_for(x))].value;
}

Tree fit_tree_on_rows(const MatrixXd& x, const MatrixXd& y, std::span<const int> rows, const TreeParams& params,
                      std::uint64_t seed) {
  check_training_data(x, y);
  check_tree_params(params);
  if (rows.empty()) throw InvalidArgument("empty training data");
  return TreeBuilder(x, y, params, seed).build(std::vector<int>(rows.begin(), rows.end()));
}

Tree fit_tree(const MatrixXd& x, const MatrixXd& y, const TreeParams& params, std::uint64_t seed) {
  std::vector<int> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  return fit_tree_on_rows(x, y, rows, params, seed);
}

ForestParams ForestParams::str_defaults() { return ForestParams{}; }

ForestParams ForestParams::mtr_defaults() {
  ForestParams p;
  p.n_estimators = 75;
  return p;
}

void ForestParams::validate() const {
  if (n_estimators < 1) throw InvalidArgument("n_estimators must be >= 1");
  if (max_depth < 1) throw InvalidArgument("max_depth must be >= 1");
  check_tree_params(tree_params());
}

nlohmann::json to_json(const ForestParams& p) {
  return {{"n_estimators", p.n_estimators}, {"max_depth", p.max_depth},
          {"min_samples_leaf", p.min_samples_leaf}, {"max_features", p.max_features},
          {"criterion", "mae"}, {"bootstrap", p.bootstrap}, {"seed", p.seed}};
}

ForestParams forest_params_from_json(const nlohmann::json& j) {
  ForestParams p;
  p.n_estimators = j.at("n_estimators").get<int>();
  p.max_depth = j.at("max_depth").get<int>();
  p.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  p.max_features = j.at("max_features").get<double>();
  p.bootstrap = j.at("bootstrap").get<bool>();
  p.seed = j.at("seed").get<std::uint64_t>();
  if (j.value("criterion", "mae") != "mae") throw InvalidArgument("only the 'mae' criterion is supported");
  return p;
}

Forest::Forest(std::vector<Tree> trees, ForestParams params, std::vector<std::string> feature_names,
               std::vector<std::string> target_names)
    : trees_(std::move(trees)),
      params_(params),
      feature_names_(std::move(feature_names)),
      target_names_(std::move(target_names)) {
  if (trees_.empty()) throw InvalidArgument("forest needs at least one tree");
  for (const auto& t : trees_) {
    if (t.n_features() != n_features() || t.n_targets() != n_targets()) {
      throw InvalidArgument("trees disagree with the forest's feature or target space");
    }
  }
}

Eigen::VectorXd Forest::predict(std::span<const double> x) const {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n_targets());
  for (const auto& t : trees_) {
    const auto& v = t.predict(x);
    for (int k = 0; k < n_targets(); ++k) sum(k) += v[static_cast<std::size_t>(k)];
  }
  return sum / static_cast<double>(trees_.size());
}

Eigen::MatrixXd Forest::predict(const MatrixXd& x) const {
  MatrixXd out(x.rows(), n_targets());
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
    out.row(r) = predict(row).transpose();
  }
  return out;
}

nlohmann::json Forest::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) {
    nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                   left = nlohmann::json::array(), right = nlohmann::json::array(),
                   cover = nlohmann::json::array(), value = nlohmann::json::array();
    for (const auto& n : t.nodes()) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      cover.push_back(n.cover);
      value.push_back(n.value);
    }
    trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left},
                     {"right", right}, {"cover", cover}, {"value", value}});
  }
  return {{"format", "elaxp-forest"},
          {"version", 1},
          {"params", elaxp::to_json(params_)},
          {"feature_names", feature_names_},
          {"target_names", target_names_},
          {"trees", trees}};
}

Forest Forest::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "elaxp-forest") throw InvalidArgument("not an elaxp forest document");
  const auto params = forest_params_from_json(j.at("params"));
  auto features = j.at("feature_names").get<std::vector<std::string>>();
  auto targets = j.at("target_names").get<std::vector<std::string>>();
  std::vector<Tree> trees;
  for (const auto& jt : j.at("trees")) {
    const auto& feature = jt.at("feature");
    std::vector<Tree::Node> nodes(feature.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      nodes[i].feature = feature[i].get<int>();
      nodes[i].threshold = jt.at("threshold")[i].get<double>();
      nodes[i].left = jt.at("left")[i].get<int>();
      nodes[i].right = jt.at("right")[i].get<int>();
      nodes[i].cover = jt.at("cover")[i].get<double>();
      nodes[i].value = jt.at("value")[i].get<std::vector<double>>();
    }
    trees.emplace_back(std::move(nodes), static_cast<int>(features.size()), static_cast<int>(targets.size()));
  }
  return Forest(std::move(trees), params, std::move(features), std::move(targets));
}

Forest fit_forest(const MatrixXd& x, const MatrixXd& y, const ForestParams& params,
                  std::vector<std::string> feature_names, std::vector<std::string> target_names) {
  params.validate();
  check_training_data(x, y);
  if (feature_names.empty()) {
    for (Index c = 0; c < x.cols(); ++c) feature_names.push_back("x" + std::to_string(c));
  }
  if (target_names.empty()) {
    for (Index c = 0; c < y.cols(); ++c) target_names.push_back("y" + std::to_string(c));
  }
  if (static_cast<Index>(feature_names.size()) != x.cols() || static_cast<Index>(target_names.size()) != y.cols()) {
    throw InvalidArgument("name lists do not match the data shape");
  }

  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<Tree> trees(static_cast<std::size_t>(params.n_estimators));
  parallel_for(trees.size(), [&](std::size_t i) {
    Rng rng(params.seed, {i});
    std::vector<int> rows(n);
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<int>(rng.below(n));
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    trees[i] = fit_tree_on_rows(x, y, rows, params.tree_params(), rng.next());
  });
  return Forest(std::move(trees), params, std::move(feature_names), std::move(target_names));
}

}  // namespace elaxp
