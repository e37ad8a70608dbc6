#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elaxp/tree_shap.hpp"
#include "json.hpp"

namespace elaxp {

// Mean attribution per feature and target, with catalog order kept.
struct GlobalImportance {
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;
  Eigen::MatrixXd values;  // features x targets

  // Feature indices by value descending; ties keep catalog order.
  std::vector<int> ranking(int target) const;
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

// Mean of |phi| over instances (signed mean when `absolute` is false).
GlobalImportance global_importance(std::span<const ShapExplanation> explanations, bool absolute = true);

// Element-wise mean of per-fold importances.
GlobalImportance average_importance(std::span<const GlobalImportance> folds);

// Names of the k most important features for one target, most important
// first. k is clamped to the feature count.
std::vector<std::string> top_k(const GlobalImportance& importance, int target, int k = 10);

struct BeeswarmRow {
  std::string target;
  std::string feature;
  std::string instance;
  double phi = 0.0;
  double feature_value = 0.0;
  double normalized_value = 0.0;  // per-feature min-max; 0.5 for a constant feature
};

// Rows for the `top` features by mean |phi|, per target, feature-major in
// ranking order. feature_values holds one row per explanation.
std::vector<BeeswarmRow> beeswarm_export(std::span<const ShapExplanation> explanations,
                                         const Eigen::MatrixXd& feature_values, int top = 20);
std::string beeswarm_csv(const std::vector<BeeswarmRow>& rows);

struct VennRegion {
  std::vector<std::string> sets;  // the sets this region lies inside
  std::vector<std::string> members;  // in none of the other sets
};

struct IntersectionReport {
  std::vector<std::string> set_names;
  std::vector<VennRegion> regions;  // 2^k - 1 regions
  std::size_t union_size = 0;

  // Cardinality of the region inside exactly the sets in `mask` (bit i = set i).
  std::size_t region_size(unsigned mask) const;
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

// Accepts two or three sets.
IntersectionReport intersect(const std::vector<std::vector<std::string>>& sets,
                             const std::vector<std::string>& set_names);

struct RepresentationVector {
  std::string algorithm;
  int fold_id = 0;
  Eigen::VectorXd values;  // catalog order
};

// Signed mean phi of one target over the given explanations.
RepresentationVector shapley_representation(std::span<const ShapExplanation> explanations, int target,
                                            std::string algorithm, int fold_id);
std::string representation_csv(const std::vector<RepresentationVector>& vectors,
                               const std::vector<std::string>& feature_names);

// 0 when either vector is zero.
double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct Contribution {
  std::string feature;
  double phi = 0.0;
};

struct LocalExplanation {
  std::string instance_id;
  std::string target;
  double base = 0.0;
  double prediction = 0.0;
  std::vector<Contribution> contributions;  // by |phi| descending, zeros left out
  double rest = 0.0;  // sum of the phi not listed
};

std::vector<LocalExplanation> local_explanation(const ShapExplanation& explanation, int top);
std::string local_explanation_csv(const std::vector<LocalExplanation>& items);
nlohmann::json local_explanation_json(const std::vector<LocalExplanation>& items);

}  // namespace elaxp
