#include "elaxp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "elaxp/csv.hpp"
#include "elaxp/errors.hpp"
#include "elaxp/parallel.hpp"
#include "elaxp/rng.hpp"
#include "elaxp/stats.hpp"

namespace elaxp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Dataset build_dataset(const FeatureMatrix& features, const PerformanceTable& performance, bool log_targets) {
  std::map<InstanceKey, std::size_t> feature_row;
  for (std::size_t i = 0; i < features.keys.size(); ++i) {
    if (!feature_row.emplace(features.keys[i], i).second) {
      throw InvalidArgument("duplicate feature row for " + instance_label(features.keys[i]));
    }
  }
  std::vector<std::string> problems;
  for (const auto& key : performance.keys) {
    if (!feature_row.contains(key)) problems.push_back(instance_label(key) + " has performance data but no features");
  }
  const std::set<InstanceKey> perf_keys(performance.keys.begin(), performance.keys.end());
  for (const auto& key : features.keys) {
    if (!perf_keys.contains(key)) problems.push_back(instance_label(key) + " has features but no performance data");
  }
  if (!problems.empty()) {
    std::string msg = "feature and performance rows do not align:";
    for (std::size_t i = 0; i < problems.size() && i < 10; ++i) msg += "\n  " + problems[i];
    if (problems.size() > 10) msg += "\n  ...";
    throw InvalidArgument(msg);
  }

  Dataset d;
  d.keys = performance.keys;
  d.feature_names = features.names;
  d.target_names = performance.algorithms;
  const auto n = static_cast<Index>(d.keys.size());
  d.x.resize(n, static_cast<Index>(features.names.size()));
  d.y = performance.precision;
  for (Index r = 0; r < n; ++r) d.x.row(r) = features.values.row(static_cast<Index>(feature_row.at(d.keys[static_cast<std::size_t>(r)])));

  std::vector<double> present;
  for (Index c = 0; c < d.x.cols(); ++c) {
    present.clear();
    for (Index r = 0; r < n; ++r) {
      if (!std::isnan(d.x(r, c))) present.push_back(d.x(r, c));
    }
    if (present.size() == static_cast<std::size_t>(n)) continue;
    d.imputed_features.push_back(features.names[static_cast<std::size_t>(c)]);
    const double fill = present.empty() ? 0.0 : stats::median(present);
    for (Index r = 0; r < n; ++r) {
      if (std::isnan(d.x(r, c))) d.x(r, c) = fill;
    }
  }
  if (log_targets) d.y = (d.y.array() + 1e-12).log10().matrix();
  return d;
}

std::vector<Fold> make_folds(const Dataset& data) {
  std::map<int, std::set<int>> instances_of;
  for (const auto& k : data.keys) {
    if (!instances_of[k.problem_id].insert(k.instance_id).second) {
      throw InvalidArgument("duplicate row for " + instance_label(k));
    }
  }
  if (instances_of.empty()) throw InvalidArgument("empty dataset");
  const auto& reference = instances_of.begin()->second;
  for (const auto& [p, ids] : instances_of) {
    if (ids != reference) {
      throw InvalidArgument("problem f" + std::to_string(p) + " has " + std::to_string(ids.size()) +
                            " instances but f" + std::to_string(instances_of.begin()->first) + " has " +
                            std::to_string(reference.size()) + "; every problem needs the same instance ids");
    }
  }
  std::vector<Fold> folds;
  std::map<int, std::size_t> index;
  for (int id : reference) {
    index[id] = folds.size();
    folds.push_back({id, {}});
  }
  for (std::size_t r = 0; r < data.keys.size(); ++r) {
    folds[index.at(data.keys[r].instance_id)].rows.push_back(static_cast<int>(r));
  }
  return folds;
}

const char* mode_name(Mode mode) { return mode == Mode::STR ? "STR" : "MTR"; }

Mode parse_mode(std::string_view name) {
  if (name == "STR") return Mode::STR;
  if (name == "MTR") return Mode::MTR;
  throw InvalidArgument("unknown mode '" + std::string(name) + "' (expected STR or MTR)");
}

VectorXd FoldModel::predict(std::span<const double> x) const {
  if (forests.size() == 1) return forests.front().predict(x);
  VectorXd out(static_cast<Index>(forests.size()));
  for (std::size_t t = 0; t < forests.size(); ++t) out(static_cast<Index>(t)) = forests[t].predict(x)(0);
  return out;
}

ShapExplanation FoldModel::explain(std::span<const double> x, std::string instance_id) const {
  if (forests.size() == 1) return shap_forest(forests.front(), x, std::move(instance_id));
  const auto m = static_cast<Index>(forests.size());
  ShapExplanation e;
  e.instance_id = std::move(instance_id);
  e.feature_names = forests.front().feature_names();
  e.phi.resize(static_cast<Index>(e.feature_names.size()), m);
  e.base.resize(m);
  for (Index t = 0; t < m; ++t) {
    const auto& f = forests[static_cast<std::size_t>(t)];
    const auto single = shap_forest(f, x);
    e.phi.col(t) = single.phi.col(0);
    e.base(t) = single.base(0);
    e.target_names.push_back(f.target_names().front());
  }
  return e;
}

namespace {

MatrixXd take_rows(const MatrixXd& m, const std::vector<int>& rows) {
  MatrixXd out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

}  // namespace

CvResult run_cv(const Dataset& data, Mode mode, const ForestParams& params, std::uint64_t seed, bool keep_models) {
  params.validate();
  const auto folds = make_folds(data);
  const auto n = static_cast<Index>(data.keys.size());
  const auto m = data.y.cols();
  if (m == 0) throw InvalidArgument("dataset has no targets");

  std::vector<FoldModel> models(folds.size());
  parallel_for(folds.size(), [&](std::size_t f) {
    auto& model = models[f];
    model.instance_id = folds[f].instance_id;
    model.test_rows = folds[f].rows;
    const std::set<int> held(model.test_rows.begin(), model.test_rows.end());
    for (int r = 0; r < n; ++r) {
      if (!held.contains(r)) model.train_rows.push_back(r);
    }
    if (model.train_rows.empty()) {
      throw InvalidState("fold for instance " + std::to_string(model.instance_id) + " has no training rows");
    }
    const MatrixXd x = take_rows(data.x, model.train_rows);
    const MatrixXd y = take_rows(data.y, model.train_rows);
    const auto fold_seed = derive_seed(seed, {static_cast<std::uint64_t>(f)});
    ForestParams p = params;
    if (mode == Mode::MTR) {
      p.seed = derive_seed(fold_seed, {0});
      model.forests.push_back(fit_forest(x, y, p, data.feature_names, data.target_names));
    } else {
      for (Index t = 0; t < m; ++t) {
        p.seed = derive_seed(fold_seed, {static_cast<std::uint64_t>(t)});
        model.forests.push_back(
            fit_forest(x, y.col(t), p, data.feature_names, {data.target_names[static_cast<std::size_t>(t)]}));
      }
    }
  });

  CvResult result;
  result.mode = mode;
  result.predictions = MatrixXd::Constant(n, m, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> row(static_cast<std::size_t>(data.x.cols()));
  for (const auto& model : models) {
    for (int r : model.test_rows) {
      for (Index c = 0; c < data.x.cols(); ++c) row[static_cast<std::size_t>(c)] = data.x(r, c);
      result.predictions.row(r) = model.predict(row).transpose();
    }
  }
  if (keep_models) result.models = std::move(models);
  return result;
}

VectorXd MaeReport::mean(std::size_t mode) const { return mae[mode].colwise().mean().transpose(); }

namespace {

int lowest(const std::vector<double>& v) {
  if (v.size() < 2) return -1;
  const auto it = std::min_element(v.begin(), v.end());
  if (std::count(v.begin(), v.end(), *it) > 1) return -1;
  return static_cast<int>(it - v.begin());
}

}  // namespace

int MaeReport::winner(int problem_row, int target) const {
  std::vector<double> v;
  for (const auto& m : mae) v.push_back(m(problem_row, target));
  return lowest(v);
}

int MaeReport::mean_winner(int target) const {
  std::vector<double> v;
  for (std::size_t k = 0; k < mae.size(); ++k) v.push_back(mean(k)(target));
  return lowest(v);
}

std::string MaeReport::to_csv() const {
  csv::Table t;
  t.header = {"problem"};
  for (const auto& target : targets) {
    for (const auto mode : modes) t.header.push_back(target + "_" + mode_name(mode));
  }
  if (modes.size() > 1) {
    for (const auto& target : targets) t.header.push_back(target + "_winner");
  }
  auto add_row = [&](std::string label, auto value, auto win) {
    std::vector<std::string> row{std::move(label)};
    for (std::size_t tt = 0; tt < targets.size(); ++tt) {
      for (std::size_t k = 0; k < modes.size(); ++k) row.push_back(csv::format_real(value(k, tt)));
    }
    if (modes.size() > 1) {
      for (std::size_t tt = 0; tt < targets.size(); ++tt) {
        const int w = win(tt);
        row.push_back(w < 0 ? "tie" : mode_name(modes[static_cast<std::size_t>(w)]));
      }
    }
    t.rows.push_back(std::move(row));
  };
  for (std::size_t p = 0; p < problems.size(); ++p) {
    add_row(
        "f" + std::to_string(problems[p]),
        [&](std::size_t k, std::size_t tt) { return mae[k](static_cast<Index>(p), static_cast<Index>(tt)); },
        [&](std::size_t tt) { return winner(static_cast<int>(p), static_cast<int>(tt)); });
  }
  add_row(
      "Mean", [&](std::size_t k, std::size_t tt) { return mean(k)(static_cast<Index>(tt)); },
      [&](std::size_t tt) { return mean_winner(static_cast<int>(tt)); });
  std::ostringstream out;
  csv::write_table(out, t);
  return out.str();
}

nlohmann::json MaeReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  auto cell_json = [&](auto value, int w) {
    nlohmann::json modes_j = nlohmann::json::object();
    for (std::size_t k = 0; k < modes.size(); ++k) modes_j[mode_name(modes[k])] = value(k);
    modes_j["winner"] = w < 0 ? nlohmann::json(nullptr) : nlohmann::json(mode_name(modes[static_cast<std::size_t>(w)]));
    return modes_j;
  };
  for (std::size_t p = 0; p < problems.size(); ++p) {
    nlohmann::json cells = nlohmann::json::object();
    for (std::size_t tt = 0; tt < targets.size(); ++tt) {
      cells[targets[tt]] = cell_json([&](std::size_t k) { return mae[k](static_cast<Index>(p), static_cast<Index>(tt)); },
                                     winner(static_cast<int>(p), static_cast<int>(tt)));
    }
    rows.push_back({{"problem", "f" + std::to_string(problems[p])}, {"mae", cells}});
  }
  nlohmann::json mean_cells = nlohmann::json::object();
  for (std::size_t tt = 0; tt < targets.size(); ++tt) {
    mean_cells[targets[tt]] =
        cell_json([&](std::size_t k) { return mean(k)(static_cast<Index>(tt)); }, mean_winner(static_cast<int>(tt)));
  }
  rows.push_back({{"problem", "Mean"}, {"mae", mean_cells}});
  std::vector<std::string> mode_names;
  for (const auto mode : modes) mode_names.push_back(mode_name(mode));
  return {{"targets", targets}, {"modes", mode_names}, {"rows", rows}};
}

MaeReport mae_report(const Dataset& data, const std::vector<CvResult>& results) {
  if (results.empty()) throw InvalidArgument("no cross-validation results to report");
  MaeReport report;
  report.targets = data.target_names;
  std::map<int, std::size_t> problem_row;
  for (const auto& k : data.keys) problem_row.emplace(k.problem_id, 0);
  for (auto& [p, idx] : problem_row) {
    idx = report.problems.size();
    report.problems.push_back(p);
  }
  const auto np = static_cast<Index>(report.problems.size());
  const auto m = data.y.cols();
  for (const auto& res : results) {
    if (res.predictions.rows() != data.y.rows() || res.predictions.cols() != m) {
      throw InvalidArgument(std::string(mode_name(res.mode)) + " predictions do not match the dataset shape");
    }
    MatrixXd sum = MatrixXd::Zero(np, m);
    VectorXd count = VectorXd::Zero(np);
    for (Index r = 0; r < data.y.rows(); ++r) {
      const auto p = static_cast<Index>(problem_row.at(data.keys[static_cast<std::size_t>(r)].problem_id));
      for (Index t = 0; t < m; ++t) {
        const double pred = res.predictions(r, t);
        if (!std::isfinite(pred)) {
          throw InvalidArgument(std::string("missing ") + mode_name(res.mode) + " prediction for " +
                                instance_label(data.keys[static_cast<std::size_t>(r)]));
        }
        sum(p, t) += std::abs(pred - data.y(r, t));
      }
      count(p) += 1.0;
    }
    report.modes.push_back(res.mode);
    report.mae.push_back(sum.array().colwise() / count.array());
  }
  return report;
}

}  // namespace elaxp
