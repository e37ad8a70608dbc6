#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elaxp/ela.hpp"
#include "elaxp/forest.hpp"
#include "elaxp/sampling.hpp"
#include "elaxp/tree_shap.hpp"
#include "json.hpp"

namespace elaxp {

struct InstanceKey {
  int problem_id = 0;
  int instance_id = 0;

  friend auto operator<=>(const InstanceKey&, const InstanceKey&) = default;
};

// "f4_i1"
std::string instance_label(const InstanceKey& key);

// ---------------------------------------------------------------------------
// Problem suite

struct SuiteConfig {
  int dim = 2;
  int instances = 10;  // instance ids 1..instances
  std::vector<int> problems;  // empty = all 24
  std::uint64_t seed = 1;

  std::vector<int> problem_ids() const;
  std::vector<InstanceKey> keys() const;
};

std::uint64_t instance_seed(const SuiteConfig& suite, const InstanceKey& key);
ProblemInstance make_suite_problem(const SuiteConfig& suite, const InstanceKey& key);
nlohmann::json instance_catalog(const SuiteConfig& suite);

// ---------------------------------------------------------------------------
// Feature matrix

struct FeatureConfig {
  int multiplier = 30;
  int repetitions = 3;
  std::vector<FeatureGroup> groups = default_groups();
  SamplingOptions sampling;
  std::uint64_t seed = 1;
};

// One row per instance key; NaN marks a missing feature value.
struct FeatureMatrix {
  std::vector<InstanceKey> keys;
  std::vector<std::string> names;
  Eigen::MatrixXd values;
};

// Median over `repetitions` independently sampled feature vectors per instance.
FeatureMatrix compute_feature_matrix(const SuiteConfig& suite, const FeatureConfig& config);

// Columns problem_id, instance_id, then one per feature; empty cell = missing.
std::string feature_matrix_csv(const FeatureMatrix& m);
FeatureMatrix read_feature_matrix(std::istream& in);

// ---------------------------------------------------------------------------
// Performance data

struct RunRecord {
  InstanceKey key;
  std::string algorithm;
  int run_id = 0;
  double precision = 0.0;
};

// Median best precision per (instance, algorithm) cell.
struct PerformanceTable {
  std::vector<InstanceKey> keys;  // sorted
  std::vector<std::string> algorithms;
  Eigen::MatrixXd precision;  // keys x algorithms
  int budget = 0;  // 0 when unknown
  int runs_per_cell = 0;  // 0 when cells hold differing run counts

  nlohmann::json metadata() const;
};

// Algorithms keep their order of first appearance. Throws InvalidArgument
// listing missing cells, and on negative or non-finite precision.
PerformanceTable ingest_performance(const std::vector<RunRecord>& runs);

// Columns problem_id, instance_id, algorithm, run_id, precision.
std::vector<RunRecord> read_runs_csv(std::istream& in);
std::string runs_csv(const std::vector<RunRecord>& runs);

// Wide layout: problem_id, instance_id, one column per algorithm.
std::string performance_csv(const PerformanceTable& table);
PerformanceTable read_performance_csv(std::istream& in);

struct EsVariant {
  std::string name;
  double initial_sigma = 1.0;
};

struct SimulationConfig {
  int budget = 1000;  // evaluations per run
  int runs = 10;
  std::vector<EsVariant> algorithms{{"ES_sigma0.1", 0.1}, {"ES_sigma1", 1.0}, {"ES_sigma3", 3.0}};
  std::uint64_t seed = 1;
};

// Best precision of one (1+1)-ES run with the 1/5 success rule, started
// uniformly in [-5, 5]^dim.
double run_one_plus_one_es(const ProblemInstance& problem, double initial_sigma, int budget, std::uint64_t seed);

std::vector<RunRecord> simulate_runs(const SuiteConfig& suite, const SimulationConfig& config);
PerformanceTable simulate_performance(const SuiteConfig& suite, const SimulationConfig& config);

// ---------------------------------------------------------------------------
// Learning data and cross-validation

struct Dataset {
  std::vector<InstanceKey> keys;
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
  std::vector<std::string> imputed_features;  // columns that had missing values
};

// Joins on (problem_id, instance_id). Missing feature values are replaced by
// the column median, or 0 when a column has no values at all. With
// `log_targets`, targets become log10(precision + 1e-12).
Dataset build_dataset(const FeatureMatrix& features, const PerformanceTable& performance, bool log_targets = false);

// Rows sharing one instance id across every problem.
struct Fold {
  int instance_id = 0;
  std::vector<int> rows;
};

// Leave-one-instance-out plan, ordered by instance id. Throws when problems
// do not share the same instance ids.
std::vector<Fold> make_folds(const Dataset& data);

enum class Mode { STR, MTR };
const char* mode_name(Mode mode);
Mode parse_mode(std::string_view name);

struct FoldModel {
  int instance_id = 0;
  std::vector<int> train_rows;
  std::vector<int> test_rows;
  // STR: one single-target forest per target. MTR: one forest for all targets.
  std::vector<Forest> forests;

  Eigen::VectorXd predict(std::span<const double> x) const;
  ShapExplanation explain(std::span<const double> x, std::string instance_id = {}) const;
};

struct CvResult {
  Mode mode = Mode::STR;
  Eigen::MatrixXd predictions;  // out-of-fold, rows x targets
  std::vector<FoldModel> models;  // empty unless kept
};

// Fold f uses seed derive_seed(seed, {f}); target t of STR uses
// derive_seed(fold_seed, {t}) and MTR uses derive_seed(fold_seed, {0}), so
// STR and MTR coincide for a single target with equal params.
CvResult run_cv(const Dataset& data, Mode mode, const ForestParams& params, std::uint64_t seed,
                bool keep_models = false);

struct MaeReport {
  std::vector<int> problems;
  std::vector<std::string> targets;
  std::vector<Mode> modes;
  // mae[mode](problem row, target)
  std::vector<Eigen::MatrixXd> mae;

  // Grand mean per target over the problem rows.
  Eigen::VectorXd mean(std::size_t mode) const;
  // Mode index with the lowest value, or -1 on a tie or with fewer than two modes.
  int winner(int problem_row, int target) const;
  int mean_winner(int target) const;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

MaeReport mae_report(const Dataset& data, const std::vector<CvResult>& results);

}  // namespace elaxp
