#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace elaxp {

struct TreeParams {
  int max_depth = 25;  // 0 yields a single leaf
  int min_samples_leaf = 1;
  // Fraction of features examined at every split; 1.0 examines all.
  double max_features = 1.0;
};

// Regression tree stored as a flat node array; node 0 is the root.
class Tree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // rows with x[feature] <= threshold go left
    int left = -1;
    int right = -1;
    double cover = 0.0;  // training rows (bootstrap copies counted) reaching the node
    std::vector<double> value;  // leaves only, one entry per target

    bool is_leaf() const { return feature < 0; }
  };

  Tree() = default;
  // Validates structure: child indices, leaf value lengths, feature range.
  Tree(std::vector<Node> nodes, int n_features, int n_targets);

  const std::vector<Node>& nodes() const { return nodes_; }
  int n_features() const { return n_features_; }
  int n_targets() const { return n_targets_; }
  // Longest root-to-leaf edge count.
  int depth() const;

  int leaf_for(std::span<const double> x) const;
  const std::vector<double>& predict(std::span<const double> x) const;

 private:
  std::vector<Node> nodes_;
  int n_features_ = 0;
  int n_targets_ = 0;
};

// Greedy CART with the mean-absolute-error criterion: a split minimises the
// sum over targets and children of absolute deviations from the child median.
// Leaves predict the per-target median. Fits on every row once.
Tree fit_tree(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const TreeParams& params,
              std::uint64_t seed);

// Same, restricted to `rows` (repeats allowed, as produced by bootstrapping).
Tree fit_tree_on_rows(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, std::span<const int> rows,
                      const TreeParams& params, std::uint64_t seed);

struct ForestParams {
  int n_estimators = 25;
  int max_depth = 25;
  int min_samples_leaf = 1;
  double max_features = 1.0;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  static ForestParams str_defaults();  // 25 trees, depth 25
  static ForestParams mtr_defaults();  // 75 trees, depth 25
  void validate() const;
  TreeParams tree_params() const { return {max_depth, min_samples_leaf, max_features}; }

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

nlohmann::json to_json(const ForestParams& p);
ForestParams forest_params_from_json(const nlohmann::json& j);

class Forest {
 public:
  Forest() = default;
  Forest(std::vector<Tree> trees, ForestParams params, std::vector<std::string> feature_names,
         std::vector<std::string> target_names);

  const std::vector<Tree>& trees() const { return trees_; }
  const ForestParams& params() const { return params_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::string>& target_names() const { return target_names_; }
  int n_features() const { return static_cast<int>(feature_names_.size()); }
  int n_targets() const { return static_cast<int>(target_names_.size()); }

  // Mean of the trees' leaf predictions, per target.
  Eigen::VectorXd predict(std::span<const double> x) const;
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;

  nlohmann::json to_json() const;
  static Forest from_json(const nlohmann::json& j);

 private:
  std::vector<Tree> trees_;
  ForestParams params_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> target_names_;
};

// Tree i draws its bootstrap and feature subsets from stream (params.seed, i),
// so the result does not depend on how trees are scheduled.
Forest fit_forest(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const ForestParams& params,
                  std::vector<std::string> feature_names = {}, std::vector<std::string> target_names = {});

}  // namespace elaxp
