#include <algorithm>
#include <cmath>
#include <string>

#include "elaxp/ela.hpp"
#include "elaxp/errors.hpp"
#include "elaxp/stats.hpp"
#include "ela_internal.hpp"

namespace elaxp {

std::string_view group_name(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::cm_angle: return "cm_angle";
    case FeatureGroup::cm_grad: return "cm_grad";
    case FeatureGroup::disp: return "disp";
    case FeatureGroup::ela_conv: return "ela_conv";
    case FeatureGroup::ela_curv: return "ela_curv";
    case FeatureGroup::ela_distr: return "ela_distr";
    case FeatureGroup::ela_level: return "ela_level";
    case FeatureGroup::ela_meta: return "ela_meta";
    case FeatureGroup::ic: return "ic";
    case FeatureGroup::nbc: return "nbc";
  }
  return "unknown";
}

FeatureGroup parse_group(std::string_view name) {
  for (auto g : kAllGroups) {
    if (group_name(g) == name) return g;
  }
  if (name == "ela_local") {
    throw InvalidArgument("feature group 'ela_local' is not implemented (needs local-search batches)");
  }
  throw InvalidArgument("unknown feature group '" + std::string(name) + "'");
}

bool needs_evaluator(FeatureGroup group) {
  return group == FeatureGroup::ela_conv || group == FeatureGroup::ela_curv;
}

void FeatureVector::add(std::string name, FeatureGroup group, std::optional<double> value) {
  if (value && !std::isfinite(*value)) value.reset();
  entries_.push_back({std::move(name), group, value});
}

void FeatureVector::append(const FeatureVector& other) {
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

bool FeatureVector::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.name == name; });
}

std::optional<double> FeatureVector::get(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.value;
  }
  throw InvalidArgument("feature '" + std::string(name) + "' not present");
}

double FeatureVector::value(std::string_view name) const {
  const auto v = get(name);
  if (!v) throw InvalidArgument("feature '" + std::string(name) + "' is missing");
  return *v;
}

std::vector<std::string> FeatureVector::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

namespace {

std::vector<CatalogEntry> build_catalog() {
  using ela::internal::percent_label;
  std::vector<CatalogEntry> c;
  auto add = [&](FeatureGroup g, const std::string& suffix) {
    c.push_back({std::string(group_name(g)) + "." + suffix, g, needs_evaluator(g)});
  };
  for (const char* f : {"dist_ctr2best", "dist_ctr2worst", "angle", "y_ratio_best2worst"}) {
    add(FeatureGroup::cm_angle, std::string(f) + ".mean");
    add(FeatureGroup::cm_angle, std::string(f) + ".sd");
  }
  add(FeatureGroup::cm_grad, "grad_homo.mean");
  add(FeatureGroup::cm_grad, "grad_homo.sd");
  for (const char* stat : {"ratio_mean", "ratio_median", "diff_mean", "diff_median"}) {
    for (double q : ela::kDispQuantiles) add(FeatureGroup::disp, std::string(stat) + "_" + percent_label(q));
  }
  for (const char* f : {"conv_prob", "lin_prob", "lin_dev.orig"}) add(FeatureGroup::ela_conv, f);
  for (const char* f : {"grad_norm", "grad_scale", "hessian_cond"}) {
    for (const char* s : {"min", "max", "mean", "sd"}) add(FeatureGroup::ela_curv, std::string(f) + "." + s);
  }
  for (const char* f : {"skewness", "kurtosis", "number_of_peaks"}) add(FeatureGroup::ela_distr, f);
  for (double q : ela::kLevelQuantiles) {
    const auto p = percent_label(q);
    add(FeatureGroup::ela_level, "mmce_lda_" + p);
    add(FeatureGroup::ela_level, "mmce_qda_" + p);
    add(FeatureGroup::ela_level, "lda_qda_" + p);
  }
  for (const char* f : {"lin_simple.adj_r2", "lin_simple.intercept", "lin_simple.coef.min",
                        "lin_simple.coef.max", "lin_simple.coef.max_by_min", "lin_w_interact.adj_r2",
                        "quad_simple.adj_r2", "quad_simple.cond", "quad_w_interact.adj_r2"}) {
    add(FeatureGroup::ela_meta, f);
  }
  for (const char* f : {"h.max", "eps.s", "eps.max", "eps.ratio", "m0"}) add(FeatureGroup::ic, f);
  for (const char* f : {"nn_nb.sd_ratio", "nn_nb.mean_ratio", "nn_nb.cor", "dist_ratio.coeff_var",
                        "nb_fitness.cor"}) {
    add(FeatureGroup::nbc, f);
  }
  return c;
}

}  // namespace

const std::vector<CatalogEntry>& feature_catalog() {
  static const std::vector<CatalogEntry> catalog = build_catalog();
  return catalog;
}

std::vector<CatalogEntry> catalog_for(std::span<const FeatureGroup> groups) {
  std::vector<CatalogEntry> out;
  for (const auto& e : feature_catalog()) {
    if (std::find(groups.begin(), groups.end(), e.group) != groups.end()) out.push_back(e);
  }
  return out;
}

nlohmann::json catalog_manifest() {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& e : feature_catalog()) {
    features.push_back({{"name", e.name}, {"group", std::string(group_name(e.group))},
                        {"needs_evaluator", e.needs_evaluator}});
  }
  nlohmann::json groups = nlohmann::json::array();
  for (auto g : kAllGroups) groups.push_back(std::string(group_name(g)));
  return {{"format", "elaxp-feature-catalog"},
          {"version", 1},
          {"feature_count", feature_catalog().size()},
          {"groups", groups},
          {"omitted_groups",
           nlohmann::json::array({{{"group", "ela_local"},
                                   {"reason", "requires batches of local-search runs per sample"}}})},
          {"features", features}};
}

std::vector<FeatureGroup> default_groups(bool evaluator_backed) {
  std::vector<FeatureGroup> out;
  for (auto g : kAllGroups) {
    if (evaluator_backed || !needs_evaluator(g)) out.push_back(g);
  }
  return out;
}

FeatureVector aggregate_median(std::span<const FeatureVector> repetitions) {
  if (repetitions.empty()) throw InvalidArgument("aggregate_median needs at least one repetition");
  const auto& first = repetitions.front();
  for (const auto& r : repetitions) {
    if (r.size() != first.size()) throw InvalidArgument("repetitions have different feature counts");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r.entries()[i].name != first.entries()[i].name) {
        throw InvalidArgument("repetitions disagree on feature " + std::to_string(i) + ": '" +
                              r.entries()[i].name + "' vs '" + first.entries()[i].name + "'");
      }
    }
  }
  FeatureVector out;
  std::vector<double> present;
  for (std::size_t i = 0; i < first.size(); ++i) {
    present.clear();
    for (const auto& r : repetitions) {
      if (const auto v = r.entries()[i].value) present.push_back(*v);
    }
    std::optional<double> med;
    if (!present.empty()) med = stats::median(present);
    out.add(first.entries()[i].name, first.entries()[i].group, med);
  }
  return out;
}

}  // namespace elaxp
