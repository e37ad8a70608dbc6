#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "elaxp/bbob.hpp"
#include "elaxp/sampling.hpp"

namespace elaxp {

// Feature groups in catalog order. ela_local is not computed (it needs whole
// batches of local searches); the manifest records its absence.
enum class FeatureGroup { cm_angle, cm_grad, disp, ela_conv, ela_curv, ela_distr, ela_level, ela_meta, ic, nbc };

inline constexpr FeatureGroup kAllGroups[] = {
    FeatureGroup::cm_angle, FeatureGroup::cm_grad,  FeatureGroup::disp,      FeatureGroup::ela_conv,
    FeatureGroup::ela_curv, FeatureGroup::ela_distr, FeatureGroup::ela_level, FeatureGroup::ela_meta,
    FeatureGroup::ic,       FeatureGroup::nbc};

std::string_view group_name(FeatureGroup group);
// Throws InvalidArgument for names outside the catalog.
FeatureGroup parse_group(std::string_view name);
// Groups that spend extra objective evaluations beyond the sample.
bool needs_evaluator(FeatureGroup group);

struct FeatureValue {
  std::string name;
  FeatureGroup group;
  std::optional<double> value;  // empty = missing
};

// Ordered name -> value map, one row of the learning data set.
class FeatureVector {
 public:
  // Non-finite values are stored as missing.
  void add(std::string name, FeatureGroup group, std::optional<double> value);
  void append(const FeatureVector& other);

  std::size_t size() const { return entries_.size(); }
  const std::vector<FeatureValue>& entries() const { return entries_; }
  bool contains(std::string_view name) const;
  // Throws InvalidArgument when the name is absent.
  std::optional<double> get(std::string_view name) const;
  double value(std::string_view name) const;  // throws when missing
  std::vector<std::string> names() const;

 private:
  std::vector<FeatureValue> entries_;
};

struct CatalogEntry {
  std::string name;
  FeatureGroup group;
  bool needs_evaluator;
};

const std::vector<CatalogEntry>& feature_catalog();
std::vector<CatalogEntry> catalog_for(std::span<const FeatureGroup> groups);
nlohmann::json catalog_manifest();

using Objective = std::function<double(const Eigen::VectorXd&)>;

namespace ela {

inline constexpr double kLevelQuantiles[] = {0.10, 0.25, 0.50};
inline constexpr double kDispQuantiles[] = {0.02, 0.05, 0.10, 0.25};

FeatureVector distr(const Eigen::VectorXd& values);
FeatureVector meta(const Eigen::MatrixXd& points, const Eigen::VectorXd& values);
FeatureVector level(const Eigen::MatrixXd& points, const Eigen::VectorXd& values, std::uint64_t seed,
                    std::span<const double> quantiles = kLevelQuantiles);
FeatureVector disp(const Eigen::MatrixXd& points, const Eigen::VectorXd& values,
                   std::span<const double> quantiles = kDispQuantiles);
FeatureVector nbc(const Eigen::MatrixXd& points, const Eigen::VectorXd& values);
FeatureVector ic(const Eigen::MatrixXd& points, const Eigen::VectorXd& values, std::uint64_t seed);
FeatureVector cm_angle(const Eigen::MatrixXd& points, const Eigen::VectorXd& values, Bounds bounds,
                       int blocks_per_dim = 2);
FeatureVector cm_grad(const Eigen::MatrixXd& points, const Eigen::VectorXd& values, Bounds bounds,
                      int blocks_per_dim = 2);
FeatureVector conv(const Objective& f, const Eigen::MatrixXd& points, const Eigen::VectorXd& values,
                   std::uint64_t seed, int n_pairs = 1000);
FeatureVector curv(const Objective& f, const Eigen::MatrixXd& points, std::uint64_t seed,
                   int subset_size = 100, double step = 1e-3);

namespace detail {

// Signed information-content symbols: 1 if r > eps, -1 if r < -eps, else 0.
std::vector<int> ic_symbols(std::span<const double> ratios, double eps);
// Entropy over the six ordered pairs of distinct consecutive symbols, log base 6.
double ic_entropy(std::span<const int> symbols);
// Length of the sequence left after dropping zeros and merging repeats,
// relative to the symbol count.
double ic_partial_information(std::span<const int> symbols);
// Features from the value-change ratios along a tour.
FeatureVector ic_from_ratios(std::span<const double> ratios);
// Nearest-neighbour tour through the points, starting at `start`.
std::vector<Eigen::Index> nearest_neighbour_tour(const Eigen::MatrixXd& points, Eigen::Index start);
// Epsilon grid: 0 followed by 1000 log-spaced values from 1e-5 to 1e15.
const std::vector<double>& ic_epsilon_grid();

}  // namespace detail
}  // namespace ela

// Concatenation of the requested groups in catalog order.
FeatureVector compute_features(const ProblemInstance& problem, const SampleSet& sample,
                               std::span<const FeatureGroup> groups, std::uint64_t seed);
std::vector<FeatureGroup> default_groups(bool evaluator_backed = true);

// Per-feature median of repetitions; missing entries are skipped.
FeatureVector aggregate_median(std::span<const FeatureVector> repetitions);

}  // namespace elaxp
