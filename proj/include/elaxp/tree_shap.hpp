#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elaxp/forest.hpp"
#include "json.hpp"

namespace elaxp {

struct ShapExplanation {
  Eigen::MatrixXd phi;  // n_features x m
  Eigen::VectorXd base;  // expected output per target
  std::string instance_id;
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;

  // base + column sums of phi.
  Eigen::VectorXd output() const;

  nlohmann::json to_json() const;
  static ShapExplanation from_json(const nlohmann::json& j);
  // First record holds the base values under the feature label "(base)".
  std::string to_csv() const;
};

// Cover-weighted mean of the leaf values.
Eigen::VectorXd expected_value(const Tree& tree);

// Path-dependent TreeSHAP. Every node needs a positive cover, otherwise
// InvalidState is thrown.
ShapExplanation shap_tree(const Tree& tree, std::span<const double> x);

// Mean of the per-tree explanations, carrying the forest's names.
ShapExplanation shap_forest(const Forest& forest, std::span<const double> x, std::string instance_id = {});

// Enumerates every subset of the features the tree splits on.
// Refuses trees that use more than 15 distinct features.
ShapExplanation brute_force_shap(const Tree& tree, std::span<const double> x);

}  // namespace elaxp
