#include "elaxp/config.hpp"

#include "elaxp/csv.hpp"
#include "elaxp/errors.hpp"
#include "elaxp/rng.hpp"

namespace elaxp {

using nlohmann::json;

namespace {

json forest_json(const ForestParams& p) {
  return {{"n_estimators", p.n_estimators}, {"max_depth", p.max_depth}, {"min_samples_leaf", p.min_samples_leaf},
          {"max_features", p.max_features}, {"bootstrap", p.bootstrap}};
}

void merge_strict(json& base, const json& overlay, const std::string& where) {
  if (!overlay.is_object()) throw InvalidArgument("config section '" + where + "' must be an object");
  for (const auto& [key, value] : overlay.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) throw InvalidArgument("unknown config key '" + path + "'");
    auto& slot = base[key];
    if (slot.is_object()) {
      merge_strict(slot, value, path);
    } else {
      slot = value;
    }
  }
}

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument("config key '" + where + key + "' has the wrong type");
  }
}

ForestParams parse_forest(const json& j, const std::string& where) {
  ForestParams p;
  p.n_estimators = get<int>(j, "n_estimators", where);
  p.max_depth = get<int>(j, "max_depth", where);
  p.min_samples_leaf = get<int>(j, "min_samples_leaf", where);
  p.max_features = get<double>(j, "max_features", where);
  p.bootstrap = get<bool>(j, "bootstrap", where);
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(where + ": " + e.what());
  }
  return p;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument("invalid config: " + message);
}

}  // namespace

std::filesystem::path RunConfig::features_file() const {
  return features_path.empty() ? out_dir / "features.csv" : features_path;
}
std::filesystem::path RunConfig::runs_file() const { return runs_path.empty() ? out_dir / "runs.csv" : runs_path; }
std::filesystem::path RunConfig::performance_file() const {
  return performance_path.empty() ? out_dir / "performance.csv" : performance_path;
}

std::uint64_t RunConfig::stage_seed(std::uint64_t stage) const { return derive_seed(seed, {stage}); }

json profile_defaults(const std::string& profile) {
  const bool paper = profile == "paper";
  if (!paper && profile != "desk") throw InvalidArgument("unknown profile '" + profile + "' (expected desk or paper)");
  std::vector<std::string> groups;
  for (auto g : default_groups()) groups.emplace_back(group_name(g));
  const TsneOptions t;
  return {{"profile", profile},
          {"seed", 1},
          {"suite", {{"dim", paper ? 5 : 2}, {"instances", paper ? 50 : 10}, {"problems", json::array()}}},
          {"features",
           {{"multiplier", paper ? 50 : 30}, {"repetitions", paper ? 10 : 3}, {"groups", groups},
            {"maximin_sweeps", 1000}}},
          {"simulation",
           {{"budget", paper ? 50000 : 1000},
            {"runs", 10},
            {"algorithms", json::array({{{"name", "ES_sigma0.1"}, {"initial_sigma", 0.1}},
                                        {{"name", "ES_sigma1"}, {"initial_sigma", 1.0}},
                                        {{"name", "ES_sigma3"}, {"initial_sigma", 3.0}}})}}},
          {"evaluation",
           {{"folds", paper ? 50 : 10},
            {"modes", {"STR", "MTR"}},
            {"log_targets", false},
            {"str", forest_json(ForestParams::str_defaults())},
            {"mtr", forest_json(ForestParams::mtr_defaults())}}},
          {"explain",
           {{"problem", 4},
            {"instance", 1},
            {"top_k", 10},
            {"beeswarm_top", 20},
            {"local_top", 10},
            {"tsne",
             {{"perplexity", t.perplexity},
              {"iterations", t.iterations},
              {"early_exaggeration", t.early_exaggeration},
              {"exaggeration_iterations", t.exaggeration_iterations},
              {"learning_rate", t.learning_rate}}}}},
          {"paths", {{"out_dir", "out"}, {"features", ""}, {"runs", ""}, {"performance", ""}}}};
}

json RunConfig::to_json() const {
  json j = profile_defaults(profile);
  j["seed"] = seed;
  j["suite"] = {{"dim", suite.dim}, {"instances", suite.instances}, {"problems", suite.problems}};
  std::vector<std::string> groups;
  for (auto g : features.groups) groups.emplace_back(group_name(g));
  j["features"] = {{"multiplier", features.multiplier}, {"repetitions", features.repetitions}, {"groups", groups},
                   {"maximin_sweeps", features.sampling.maximin_sweeps}};
  json algs = json::array();
  for (const auto& a : simulation.algorithms) algs.push_back({{"name", a.name}, {"initial_sigma", a.initial_sigma}});
  j["simulation"] = {{"budget", simulation.budget}, {"runs", simulation.runs}, {"algorithms", algs}};
  std::vector<std::string> mode_names;
  for (auto m : modes) mode_names.emplace_back(mode_name(m));
  j["evaluation"] = {{"folds", folds}, {"modes", mode_names}, {"log_targets", log_targets},
                     {"str", forest_json(str_params)}, {"mtr", forest_json(mtr_params)}};
  j["explain"] = {{"problem", explain.problem},
                  {"instance", explain.instance},
                  {"top_k", explain.top_k},
                  {"beeswarm_top", explain.beeswarm_top},
                  {"local_top", explain.local_top},
                  {"tsne",
                   {{"perplexity", explain.tsne.perplexity},
                    {"iterations", explain.tsne.iterations},
                    {"early_exaggeration", explain.tsne.early_exaggeration},
                    {"exaggeration_iterations", explain.tsne.exaggeration_iterations},
                    {"learning_rate", explain.tsne.learning_rate}}}};
  j["paths"] = {{"out_dir", out_dir.string()}, {"features", features_path.string()}, {"runs", runs_path.string()},
                {"performance", performance_path.string()}};
  return j;
}

RunConfig make_config(const json& overlay, const std::optional<std::string>& profile_override) {
  if (!overlay.is_null() && !overlay.is_object()) throw InvalidArgument("config must be a JSON object");
  std::string profile = "desk";
  if (overlay.is_object() && overlay.contains("profile")) {
    if (!overlay["profile"].is_string()) throw InvalidArgument("config key 'profile' has the wrong type");
    profile = overlay["profile"].get<std::string>();
  }
  if (profile_override) profile = *profile_override;
  json j = profile_defaults(profile);
  if (overlay.is_object()) merge_strict(j, overlay, "");
  j["profile"] = profile;

  RunConfig c;
  c.profile = profile;
  c.seed = get<std::uint64_t>(j, "seed", "");

  const auto& s = j["suite"];
  c.suite.dim = get<int>(s, "dim", "suite.");
  c.suite.instances = get<int>(s, "instances", "suite.");
  c.suite.problems = get<std::vector<int>>(s, "problems", "suite.");
  require(c.suite.dim >= 2, "suite.dim must be >= 2");
  require(c.suite.instances >= 2, "suite.instances must be >= 2");
  for (int p : c.suite.problems) require(p >= 1 && p <= kNumFunctions, "suite.problems entries must be in 1..24");

  const auto& f = j["features"];
  c.features.multiplier = get<int>(f, "multiplier", "features.");
  c.features.repetitions = get<int>(f, "repetitions", "features.");
  c.features.sampling.maximin_sweeps = get<int>(f, "maximin_sweeps", "features.");
  c.features.groups.clear();
  for (const auto& g : get<std::vector<std::string>>(f, "groups", "features.")) {
    c.features.groups.push_back(parse_group(g));
  }
  require(c.features.multiplier >= 1, "features.multiplier must be >= 1");
  require(c.features.repetitions >= 1, "features.repetitions must be >= 1");
  require(c.features.sampling.maximin_sweeps >= 0, "features.maximin_sweeps must be >= 0");
  require(!c.features.groups.empty(), "features.groups must not be empty");

  const auto& sim = j["simulation"];
  c.simulation.budget = get<int>(sim, "budget", "simulation.");
  c.simulation.runs = get<int>(sim, "runs", "simulation.");
  c.simulation.algorithms.clear();
  for (const auto& a : sim["algorithms"]) {
    if (!a.is_object()) throw InvalidArgument("simulation.algorithms entries must be objects");
    for (const auto& [key, _] : a.items()) {
      if (key != "name" && key != "initial_sigma") {
        throw InvalidArgument("unknown config key 'simulation.algorithms[]." + key + "'");
      }
    }
    c.simulation.algorithms.push_back(
        {get<std::string>(a, "name", "simulation.algorithms[]."), get<double>(a, "initial_sigma", "simulation.algorithms[].")});
    require(c.simulation.algorithms.back().initial_sigma > 0.0, "initial_sigma must be positive");
    require(!c.simulation.algorithms.back().name.empty(), "algorithm names must not be empty");
  }
  require(c.simulation.budget >= 1, "simulation.budget must be >= 1");
  require(c.simulation.runs >= 1, "simulation.runs must be >= 1");
  require(!c.simulation.algorithms.empty(), "simulation.algorithms must not be empty");

  const auto& ev = j["evaluation"];
  c.folds = get<int>(ev, "folds", "evaluation.");
  c.log_targets = get<bool>(ev, "log_targets", "evaluation.");
  c.modes.clear();
  for (const auto& m : get<std::vector<std::string>>(ev, "modes", "evaluation.")) c.modes.push_back(parse_mode(m));
  require(!c.modes.empty(), "evaluation.modes must not be empty");
  require(c.folds == c.suite.instances,
          "evaluation.folds (" + std::to_string(c.folds) + ") must equal suite.instances (" +
              std::to_string(c.suite.instances) + ") for leave-one-instance-out folds");
  c.str_params = parse_forest(ev["str"], "evaluation.str.");
  c.mtr_params = parse_forest(ev["mtr"], "evaluation.mtr.");

  const auto& ex = j["explain"];
  c.explain.problem = get<int>(ex, "problem", "explain.");
  c.explain.instance = get<int>(ex, "instance", "explain.");
  c.explain.top_k = get<int>(ex, "top_k", "explain.");
  c.explain.beeswarm_top = get<int>(ex, "beeswarm_top", "explain.");
  c.explain.local_top = get<int>(ex, "local_top", "explain.");
  const auto& t = ex["tsne"];
  c.explain.tsne.perplexity = get<double>(t, "perplexity", "explain.tsne.");
  c.explain.tsne.iterations = get<int>(t, "iterations", "explain.tsne.");
  c.explain.tsne.early_exaggeration = get<double>(t, "early_exaggeration", "explain.tsne.");
  c.explain.tsne.exaggeration_iterations = get<int>(t, "exaggeration_iterations", "explain.tsne.");
  c.explain.tsne.learning_rate = get<double>(t, "learning_rate", "explain.tsne.");
  require(c.explain.top_k >= 1, "explain.top_k must be >= 1");
  require(c.explain.beeswarm_top >= 1, "explain.beeswarm_top must be >= 1");
  require(c.explain.local_top >= 0, "explain.local_top must be >= 0");
  require(c.explain.tsne.perplexity > 0.0, "explain.tsne.perplexity must be positive");
  require(c.explain.tsne.iterations >= 1, "explain.tsne.iterations must be >= 1");

  const auto& paths = j["paths"];
  c.out_dir = get<std::string>(paths, "out_dir", "paths.");
  c.features_path = get<std::string>(paths, "features", "paths.");
  c.runs_path = get<std::string>(paths, "runs", "paths.");
  c.performance_path = get<std::string>(paths, "performance", "paths.");
  require(!c.out_dir.empty(), "paths.out_dir must not be empty");

  c.suite.seed = c.stage_seed(1);
  c.features.seed = c.stage_seed(2);
  c.simulation.seed = c.stage_seed(3);
  return c;
}

RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::optional<std::string>& profile_override) {
  json overlay;
  if (file) {
    const auto text = csv::read_file(*file);
    try {
      overlay = json::parse(text);
    } catch (const json::parse_error& e) {
      throw InvalidArgument("config " + file->string() + " is not valid JSON: " + e.what());
    }
  }
  return make_config(overlay, profile_override);
}

}  // namespace elaxp
