#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <set>

#include "elaxp/csv.hpp"
#include "elaxp/errors.hpp"
#include "elaxp/parallel.hpp"
#include "elaxp/pipeline.hpp"
#include "elaxp/rng.hpp"
#include "elaxp/stats.hpp"

namespace elaxp {

std::string instance_label(const InstanceKey& key) {
  return "f" + std::to_string(key.problem_id) + "_i" + std::to_string(key.instance_id);
}

std::vector<int> SuiteConfig::problem_ids() const {
  if (!problems.empty()) return problems;
  std::vector<int> all(kNumFunctions);
  for (int i = 0; i < kNumFunctions; ++i) all[static_cast<std::size_t>(i)] = i + 1;
  return all;
}

std::vector<InstanceKey> SuiteConfig::keys() const {
  std::vector<InstanceKey> out;
  for (int p : problem_ids()) {
    for (int k = 1; k <= instances; ++k) out.push_back({p, k});
  }
  return out;
}

std::uint64_t instance_seed(const SuiteConfig& suite, const InstanceKey& key) {
  return derive_seed(suite.seed, {static_cast<std::uint64_t>(key.instance_id)});
}

ProblemInstance make_suite_problem(const SuiteConfig& suite, const InstanceKey& key) {
  return make_problem(key.problem_id, instance_seed(suite, key), suite.dim);
}

nlohmann::json instance_catalog(const SuiteConfig& suite) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& key : suite.keys()) {
    const auto p = make_suite_problem(suite, key);
    list.push_back({{"function_id", key.problem_id},
                    {"instance_id", key.instance_id},
                    {"instance_seed", p.instance_seed()},
                    {"dim", p.dim()},
                    {"f_opt", p.f_opt()},
                    {"x_opt", std::vector<double>(p.x_opt().data(), p.x_opt().data() + p.dim())}});
  }
  return {{"suite_seed", suite.seed}, {"instances", list}};
}

// ---------------------------------------------------------------------------

FeatureMatrix compute_feature_matrix(const SuiteConfig& suite, const FeatureConfig& config) {
  if (config.repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
  if (config.multiplier < 1) throw InvalidArgument("sample multiplier must be >= 1");
  const auto keys = suite.keys();
  std::vector<FeatureVector> rows(keys.size());
  parallel_for(keys.size(), [&](std::size_t i) {
    const auto& key = keys[i];
    const auto problem = make_suite_problem(suite, key);
    std::vector<FeatureVector> reps;
    for (int r = 0; r < config.repetitions; ++r) {
      const auto seed = derive_seed(config.seed, {static_cast<std::uint64_t>(key.problem_id),
                                                  static_cast<std::uint64_t>(key.instance_id),
                                                  static_cast<std::uint64_t>(r)});
      const auto sample = sample_and_evaluate(problem, config.multiplier, seed, config.sampling);
      reps.push_back(compute_features(problem, sample, config.groups, derive_seed(seed, {1})));
    }
    rows[i] = aggregate_median(reps);
  });

  FeatureMatrix m;
  m.keys = keys;
  m.names = rows.front().names();
  m.values.resize(static_cast<Eigen::Index>(keys.size()), static_cast<Eigen::Index>(m.names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& entries = rows[i].entries();
    for (std::size_t j = 0; j < entries.size(); ++j) {
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          entries[j].value.value_or(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return m;
}

std::string feature_matrix_csv(const FeatureMatrix& m) {
  csv::Table t;
  t.header = {"problem_id", "instance_id"};
  t.header.insert(t.header.end(), m.names.begin(), m.names.end());
  for (std::size_t i = 0; i < m.keys.size(); ++i) {
    std::vector<std::string> row{std::to_string(m.keys[i].problem_id), std::to_string(m.keys[i].instance_id)};
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
      row.push_back(csv::format_optional(m.values(static_cast<Eigen::Index>(i), j)));
    }
    t.rows.push_back(std::move(row));
  }
  std::ostringstream out;
  csv::write_table(out, t);
  return out.str();
}

namespace {

InstanceKey parse_key(const std::vector<std::string>& row, std::size_t pcol, std::size_t icol, std::size_t line) {
  const std::string ctx = "row " + std::to_string(line);
  return {static_cast<int>(csv::parse_integer(row[pcol], ctx + ", problem_id")),
          static_cast<int>(csv::parse_integer(row[icol], ctx + ", instance_id"))};
}

void check_unique_keys(const std::vector<InstanceKey>& keys, const char* what) {
  std::set<InstanceKey> seen;
  for (const auto& k : keys) {
    if (!seen.insert(k).second) {
      throw InvalidArgument(std::string("duplicate ") + what + " row for " + instance_label(k));
    }
  }
}

}  // namespace

FeatureMatrix read_feature_matrix(std::istream& in) {
  const auto t = csv::read_table(in);
  const auto pcol = t.column("problem_id");
  const auto icol = t.column("instance_id");
  FeatureMatrix m;
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c != pcol && c != icol) {
      m.names.push_back(t.header[c]);
      cols.push_back(c);
    }
  }
  m.values.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    m.keys.push_back(parse_key(t.rows[r], pcol, icol, r + 2));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const auto v = csv::parse_optional(t.rows[r][cols[j]], "row " + std::to_string(r + 2) + ", column '" +
                                                                 t.header[cols[j]] + "'");
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          v.value_or(std::numeric_limits<double>::quiet_NaN());
    }
  }
  check_unique_keys(m.keys, "feature");
  return m;
}

// ---------------------------------------------------------------------------

nlohmann::json PerformanceTable::metadata() const {
  return {{"algorithms", algorithms}, {"budget", budget}, {"runs_per_cell", runs_per_cell},
          {"instances", keys.size()}};
}

PerformanceTable ingest_performance(const std::vector<RunRecord>& runs) {
  if (runs.empty()) throw InvalidArgument("no performance runs");
  PerformanceTable table;
  std::map<std::string, std::size_t> alg_index;
  std::set<InstanceKey> key_set;
  for (const auto& r : runs) {
    if (!std::isfinite(r.precision)) {
      throw InvalidArgument("non-finite precision for (" + instance_label(r.key) + ", " + r.algorithm + ")");
    }
    if (r.precision < 0.0) {
      throw InvalidArgument("negative precision " + csv::format_real(r.precision) + " for (" +
                            instance_label(r.key) + ", " + r.algorithm + ", run " + std::to_string(r.run_id) + ")");
    }
    if (alg_index.emplace(r.algorithm, table.algorithms.size()).second) table.algorithms.push_back(r.algorithm);
    key_set.insert(r.key);
  }
  table.keys.assign(key_set.begin(), key_set.end());

  std::map<std::pair<InstanceKey, std::size_t>, std::vector<double>> cells;
  for (const auto& r : runs) cells[{r.key, alg_index.at(r.algorithm)}].push_back(r.precision);

  // The grid spans every problem x every instance id x every algorithm seen.
  std::set<int> problems, instances;
  for (const auto& k : table.keys) {
    problems.insert(k.problem_id);
    instances.insert(k.instance_id);
  }
  std::vector<std::string> missing;
  for (int p : problems) {
    for (int i : instances) {
      for (const auto& a : table.algorithms) {
        if (!cells.contains({InstanceKey{p, i}, alg_index.at(a)})) {
          missing.push_back("(f" + std::to_string(p) + ", i" + std::to_string(i) + ", " + a + ")");
        }
      }
    }
  }
  if (!missing.empty()) {
    std::string msg = "incomplete performance grid; missing " + std::to_string(missing.size()) + " cell(s):";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
    if (missing.size() > 20) msg += " ...";
    throw InvalidArgument(msg);
  }

  table.precision.resize(static_cast<Eigen::Index>(table.keys.size()),
                         static_cast<Eigen::Index>(table.algorithms.size()));
  std::set<std::size_t> counts;
  for (std::size_t k = 0; k < table.keys.size(); ++k) {
    for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
      const auto& v = cells.at({table.keys[k], a});
      counts.insert(v.size());
      table.precision(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(a)) = stats::median(v);
    }
  }
  table.runs_per_cell = counts.size() == 1 ? static_cast<int>(*counts.begin()) : 0;
  return table;
}

std::vector<RunRecord> read_runs_csv(std::istream& in) {
  const auto t = csv::read_table(in);
  const auto pcol = t.column("problem_id");
  const auto icol = t.column("instance_id");
  const auto acol = t.column("algorithm");
  const auto rcol = t.column("run_id");
  const auto vcol = t.column("precision");
  std::vector<RunRecord> runs;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string ctx = "row " + std::to_string(r + 2);
    if (row[acol].empty()) throw InvalidArgument(ctx + ": empty algorithm name");
    runs.push_back({parse_key(row, pcol, icol, r + 2), row[acol],
                    static_cast<int>(csv::parse_integer(row[rcol], ctx + ", run_id")),
                    csv::parse_real(row[vcol], ctx + ", precision")});
  }
  return runs;
}

std::string runs_csv(const std::vector<RunRecord>& runs) {
  csv::Table t;
  t.header = {"problem_id", "instance_id", "algorithm", "run_id", "precision"};
  for (const auto& r : runs) {
    t.rows.push_back({std::to_string(r.key.problem_id), std::to_string(r.key.instance_id), r.algorithm,
                      std::to_string(r.run_id), csv::format_real(r.precision)});
  }
  std::ostringstream out;
  csv::write_table(out, t);
  return out.str();
}

std::string performance_csv(const PerformanceTable& table) {
  csv::Table t;
  t.header = {"problem_id", "instance_id"};
  t.header.insert(t.header.end(), table.algorithms.begin(), table.algorithms.end());
  for (std::size_t k = 0; k < table.keys.size(); ++k) {
    std::vector<std::string> row{std::to_string(table.keys[k].problem_id),
                                 std::to_string(table.keys[k].instance_id)};
    for (Eigen::Index a = 0; a < table.precision.cols(); ++a) {
      row.push_back(csv::format_real(table.precision(static_cast<Eigen::Index>(k), a)));
    }
    t.rows.push_back(std::move(row));
  }
  std::ostringstream out;
  csv::write_table(out, t);
  return out.str();
}

PerformanceTable read_performance_csv(std::istream& in) {
  const auto t = csv::read_table(in);
  const auto pcol = t.column("problem_id");
  const auto icol = t.column("instance_id");
  std::vector<RunRecord> runs;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto key = parse_key(t.rows[r], pcol, icol, r + 2);
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      if (c == pcol || c == icol) continue;
      runs.push_back({key, t.header[c], 1,
                      csv::parse_real(t.rows[r][c], "row " + std::to_string(r + 2) + ", column '" + t.header[c] + "'")});
    }
  }
  auto table = ingest_performance(runs);
  if (static_cast<std::size_t>(table.keys.size()) != t.rows.size()) {
    throw InvalidArgument("duplicate instance rows in performance table");
  }
  table.runs_per_cell = 0;
  return table;
}

// ---------------------------------------------------------------------------

double run_one_plus_one_es(const ProblemInstance& problem, double initial_sigma, int budget, std::uint64_t seed) {
  if (budget < 1) throw InvalidArgument("budget must be >= 1");
  if (!(initial_sigma > 0.0)) throw InvalidArgument("initial step size must be positive");
  Rng rng(seed);
  const int d = problem.dim();
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x(i) = rng.uniform(-5.0, 5.0);
  double fx = problem(x);
  double sigma = initial_sigma;
  const double grow = std::exp(1.0 / 3.0);
  const double shrink = std::exp(-1.0 / 12.0);
  Eigen::VectorXd y(d);
  for (int e = 1; e < budget; ++e) {
    for (int i = 0; i < d; ++i) y(i) = x(i) + sigma * rng.normal();
    const double fy = problem(y);
    if (fy <= fx) {
      x = y;
      fx = fy;
      sigma *= grow;
    } else {
      sigma *= shrink;
    }
  }
  return precision(problem, fx);
}

std::vector<RunRecord> simulate_runs(const SuiteConfig& suite, const SimulationConfig& config) {
  if (config.budget < 1) throw InvalidArgument("budget must be >= 1");
  if (config.runs < 1) throw InvalidArgument("runs must be >= 1");
  if (config.algorithms.empty()) throw InvalidArgument("no algorithms to simulate");
  const auto keys = suite.keys();
  const std::size_t n_alg = config.algorithms.size();
  const auto per_key = n_alg * static_cast<std::size_t>(config.runs);
  std::vector<RunRecord> runs(keys.size() * per_key);
  parallel_for(keys.size(), [&](std::size_t k) {
    const auto& key = keys[k];
    const auto problem = make_suite_problem(suite, key);
    for (std::size_t a = 0; a < n_alg; ++a) {
      for (int r = 0; r < config.runs; ++r) {
        const auto seed = derive_seed(config.seed, {static_cast<std::uint64_t>(key.problem_id),
                                                    static_cast<std::uint64_t>(key.instance_id), a,
                                                    static_cast<std::uint64_t>(r)});
        runs[k * per_key + a * static_cast<std::size_t>(config.runs) + static_cast<std::size_t>(r)] = {
            key, config.algorithms[a].name, r + 1,
            run_one_plus_one_es(problem, config.algorithms[a].initial_sigma, config.budget, seed)};
      }
    }
  });
  return runs;
}

PerformanceTable simulate_performance(const SuiteConfig& suite, const SimulationConfig& config) {
  auto table = ingest_performance(simulate_runs(suite, config));
  table.budget = config.budget;
  return table;
}

}  // namespace elaxp
