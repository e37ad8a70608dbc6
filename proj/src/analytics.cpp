#include "elaxp/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "elaxp/csv.hpp"
#include "elaxp/errors.hpp"

namespace elaxp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void check_consistent(std::span<const ShapExplanation> explanations) {
  if (explanations.empty()) throw InvalidArgument("no explanations given");
  const auto& first = explanations.front();
  for (const auto& e : explanations) {
    if (e.phi.rows() != first.phi.rows() || e.phi.cols() != first.phi.cols() ||
        e.feature_names != first.feature_names) {
      throw InvalidArgument("explanations disagree on features or targets");
    }
  }
}

std::string csv_of(const csv::Table& t) {
  std::ostringstream out;
  csv::write_table(out, t);
  return out.str();
}

}  // namespace

std::vector<int> GlobalImportance::ranking(int target) const {
  std::vector<int> order(feature_names.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values(a, target) > values(b, target); });
  return order;
}

std::string GlobalImportance::to_csv() const {
  csv::Table t;
  t.header = {"target", "rank", "feature", "importance"};
  for (std::size_t tt = 0; tt < target_names.size(); ++tt) {
    const auto order = ranking(static_cast<int>(tt));
    for (std::size_t r = 0; r < order.size(); ++r) {
      t.rows.push_back({target_names[tt], std::to_string(r + 1), feature_names[static_cast<std::size_t>(order[r])],
                        csv::format_real(values(order[r], static_cast<Index>(tt)))});
    }
  }
  return csv_of(t);
}

nlohmann::json GlobalImportance::to_json() const {
  nlohmann::json targets = nlohmann::json::object();
  for (std::size_t tt = 0; tt < target_names.size(); ++tt) {
    nlohmann::json list = nlohmann::json::array();
    for (int f : ranking(static_cast<int>(tt))) {
      list.push_back({{"feature", feature_names[static_cast<std::size_t>(f)]},
                      {"importance", values(f, static_cast<Index>(tt))}});
    }
    targets[target_names[tt]] = list;
  }
  return targets;
}

GlobalImportance global_importance(std::span<const ShapExplanation> explanations, bool absolute) {
  check_consistent(explanations);
  const auto& first = explanations.front();
  GlobalImportance g;
  g.feature_names = first.feature_names;
  g.target_names = first.target_names;
  g.values = MatrixXd::Zero(first.phi.rows(), first.phi.cols());
  for (const auto& e : explanations) {
    if (absolute) {
      g.values += e.phi.cwiseAbs();
    } else {
      g.values += e.phi;
    }
  }
  g.values /= static_cast<double>(explanations.size());
  return g;
}

GlobalImportance average_importance(std::span<const GlobalImportance> folds) {
  if (folds.empty()) throw InvalidArgument("no importances to average");
  GlobalImportance g = folds.front();
  for (std::size_t i = 1; i < folds.size(); ++i) {
    if (folds[i].feature_names != g.feature_names || folds[i].values.cols() != g.values.cols()) {
      throw InvalidArgument("importances disagree on features or targets");
    }
    g.values += folds[i].values;
  }
  g.values /= static_cast<double>(folds.size());
  return g;
}

std::vector<std::string> top_k(const GlobalImportance& importance, int target, int k) {
  if (target < 0 || target >= importance.values.cols()) throw InvalidArgument("target index out of range");
  const auto order = importance.ranking(target);
  const auto n = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), 0, order.size());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(importance.feature_names[static_cast<std::size_t>(order[i])]);
  return out;
}

std::vector<BeeswarmRow> beeswarm_export(std::span<const ShapExplanation> explanations,
                                         const MatrixXd& feature_values, int top) {
  check_consistent(explanations);
  if (feature_values.rows() != static_cast<Index>(explanations.size()) ||
      feature_values.cols() != explanations.front().phi.rows()) {
    throw InvalidArgument("feature values do not align with the explanations");
  }
  const auto imp = global_importance(explanations);
  const VectorXd lo = feature_values.colwise().minCoeff();
  const VectorXd hi = feature_values.colwise().maxCoeff();
  std::vector<BeeswarmRow> rows;
  for (Index t = 0; t < imp.values.cols(); ++t) {
    const auto order = imp.ranking(static_cast<int>(t));
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(top, 0)), order.size());
    for (std::size_t r = 0; r < n; ++r) {
      const int f = order[r];
      for (std::size_t i = 0; i < explanations.size(); ++i) {
        const double v = feature_values(static_cast<Index>(i), f);
        const double norm = hi(f) > lo(f) ? (v - lo(f)) / (hi(f) - lo(f)) : 0.5;
        rows.push_back({imp.target_names[static_cast<std::size_t>(t)], imp.feature_names[static_cast<std::size_t>(f)],
                        explanations[i].instance_id, explanations[i].phi(f, t), v, norm});
      }
    }
  }
  return rows;
}

std::string beeswarm_csv(const std::vector<BeeswarmRow>& rows) {
  csv::Table t;
  t.header = {"target", "feature", "instance", "phi", "feature_value", "normalized_value"};
  for (const auto& r : rows) {
    t.rows.push_back({r.target, r.feature, r.instance, csv::format_real(r.phi), csv::format_real(r.feature_value),
                      csv::format_real(r.normalized_value)});
  }
  return csv_of(t);
}

std::size_t IntersectionReport::region_size(unsigned mask) const {
  if (mask == 0 || mask > regions.size()) throw InvalidArgument("region mask out of range");
  return regions[mask - 1].members.size();
}

std::string IntersectionReport::to_csv() const {
  csv::Table t;
  t.header = {"region", "size", "members"};
  for (const auto& r : regions) {
    std::string label, members;
    for (const auto& s : r.sets) label += (label.empty() ? "" : "&") + s;
    for (const auto& m : r.members) members += (members.empty() ? "" : ";") + m;
    t.rows.push_back({label, std::to_string(r.members.size()), members});
  }
  return csv_of(t);
}

nlohmann::json IntersectionReport::to_json() const {
  nlohmann::json regions_j = nlohmann::json::array();
  for (const auto& r : regions) {
    regions_j.push_back({{"sets", r.sets}, {"size", r.members.size()}, {"members", r.members}});
  }
  return {{"sets", set_names}, {"union_size", union_size}, {"regions", regions_j}};
}

IntersectionReport intersect(const std::vector<std::vector<std::string>>& sets,
                             const std::vector<std::string>& set_names) {
  if (sets.size() < 2 || sets.size() > 3) throw InvalidArgument("intersect takes two or three sets");
  if (set_names.size() != sets.size()) throw InvalidArgument("one name per set is required");
  IntersectionReport report;
  report.set_names = set_names;
  const auto k = static_cast<unsigned>(sets.size());
  report.regions.resize((1U << k) - 1);
  for (unsigned mask = 1; mask < (1U << k); ++mask) {
    for (unsigned i = 0; i < k; ++i) {
      if (mask & (1U << i)) report.regions[mask - 1].sets.push_back(set_names[i]);
    }
  }
  // Members listed in first-seen order across the sets.
  std::vector<std::string> all;
  std::set<std::string> seen;
  for (const auto& s : sets) {
    for (const auto& f : s) {
      if (seen.insert(f).second) all.push_back(f);
    }
  }
  std::vector<std::set<std::string>> lookup;
  for (const auto& s : sets) lookup.emplace_back(s.begin(), s.end());
  for (const auto& f : all) {
    unsigned mask = 0;
    for (unsigned i = 0; i < k; ++i) {
      if (lookup[i].contains(f)) mask |= 1U << i;
    }
    report.regions[mask - 1].members.push_back(f);
  }
  report.union_size = all.size();
  return report;
}

RepresentationVector shapley_representation(std::span<const ShapExplanation> explanations, int target,
                                            std::string algorithm, int fold_id) {
  check_consistent(explanations);
  if (target < 0 || target >= explanations.front().phi.cols()) throw InvalidArgument("target index out of range");
  RepresentationVector v{std::move(algorithm), fold_id, VectorXd::Zero(explanations.front().phi.rows())};
  for (const auto& e : explanations) v.values += e.phi.col(target);
  v.values /= static_cast<double>(explanations.size());
  return v;
}

std::string representation_csv(const std::vector<RepresentationVector>& vectors,
                               const std::vector<std::string>& feature_names) {
  csv::Table t;
  t.header = {"algorithm", "fold"};
  t.header.insert(t.header.end(), feature_names.begin(), feature_names.end());
  for (const auto& v : vectors) {
    if (v.values.size() != static_cast<Index>(feature_names.size())) {
      throw InvalidArgument("representation length differs from the feature count");
    }
    std::vector<std::string> row{v.algorithm, std::to_string(v.fold_id)};
    for (Index i = 0; i < v.values.size(); ++i) row.push_back(csv::format_real(v.values(i)));
    t.rows.push_back(std::move(row));
  }
  return csv_of(t);
}

double cosine_similarity(const VectorXd& a, const VectorXd& b) {
  if (a.size() != b.size()) throw InvalidArgument("cosine similarity of vectors with different lengths");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

std::vector<LocalExplanation> local_explanation(const ShapExplanation& explanation, int top) {
  const VectorXd out = explanation.output();
  std::vector<LocalExplanation> items;
  for (Index t = 0; t < explanation.phi.cols(); ++t) {
    LocalExplanation item;
    item.instance_id = explanation.instance_id;
    item.target = explanation.target_names[static_cast<std::size_t>(t)];
    item.base = explanation.base(t);
    item.prediction = out(t);
    std::vector<int> order;
    for (Index f = 0; f < explanation.phi.rows(); ++f) {
      if (explanation.phi(f, t) != 0.0) order.push_back(static_cast<int>(f));
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(explanation.phi(a, t)) > std::abs(explanation.phi(b, t));
    });
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(top, 0)), order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      const double phi = explanation.phi(order[i], t);
      if (i < n) {
        item.contributions.push_back({explanation.feature_names[static_cast<std::size_t>(order[i])], phi});
      } else {
        item.rest += phi;
      }
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::string local_explanation_csv(const std::vector<LocalExplanation>& items) {
  csv::Table t;
  t.header = {"instance", "target", "kind", "feature", "value"};
  for (const auto& item : items) {
    t.rows.push_back({item.instance_id, item.target, "base", "", csv::format_real(item.base)});
    for (const auto& c : item.contributions) {
      t.rows.push_back({item.instance_id, item.target, "phi", c.feature, csv::format_real(c.phi)});
    }
    t.rows.push_back({item.instance_id, item.target, "rest", "", csv::format_real(item.rest)});
    t.rows.push_back({item.instance_id, item.target, "prediction", "", csv::format_real(item.prediction)});
  }
  return csv_of(t);
}

nlohmann::json local_explanation_json(const std::vector<LocalExplanation>& items) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& item : items) {
    nlohmann::json contributions = nlohmann::json::array();
    for (const auto& c : item.contributions) contributions.push_back({{"feature", c.feature}, {"phi", c.phi}});
    out.push_back({{"instance", item.instance_id},
                   {"target", item.target},
                   {"base", item.base},
                   {"contributions", contributions},
                   {"rest", item.rest},
                   {"prediction", item.prediction}});
  }
  return out;
}

}  // namespace elaxp
