#include "elaxp/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "elaxp/analytics.hpp"
#include "elaxp/csv.hpp"
#include "elaxp/errors.hpp"
#include "elaxp/parallel.hpp"

namespace elaxp {

using Eigen::Index;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_out(const RunConfig& c, const std::string& name, const std::string& contents) {
  fs::create_directories(c.out_dir);
  csv::write_file_atomic(c.out_dir / name, contents);
}

void write_json(const RunConfig& c, const std::string& name, const json& j) { write_out(c, name, j.dump(2) + "\n"); }

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open input file " + path.string());
  return in;
}

Dataset load_dataset(const RunConfig& c) {
  auto fin = open_input(c.features_file());
  const auto features = read_feature_matrix(fin);
  auto pin = open_input(c.performance_file());
  const auto performance = read_performance_csv(pin);
  auto data = build_dataset(features, performance, c.log_targets);
  const auto folds = make_folds(data);
  if (static_cast<int>(folds.size()) != c.folds) {
    throw InvalidArgument("data has " + std::to_string(folds.size()) + " instances per problem but the config asks for " +
                          std::to_string(c.folds) + " folds");
  }
  return data;
}

std::vector<double> row_of(const Eigen::MatrixXd& x, Index r) {
  std::vector<double> v(static_cast<std::size_t>(x.cols()));
  for (Index c = 0; c < x.cols(); ++c) v[static_cast<std::size_t>(c)] = x(r, c);
  return v;
}

json performance_summary(const PerformanceTable& table) {
  json j = table.metadata();
  j["cells"] = table.keys.size() * table.algorithms.size();
  return j;
}

}  // namespace

json cmd_features(const RunConfig& c) {
  const auto m = compute_feature_matrix(c.suite, c.features);
  write_out(c, "features.csv", feature_matrix_csv(m));
  write_json(c, "feature_catalog.json", catalog_manifest());
  write_json(c, "instances.json", instance_catalog(c.suite));
  std::size_t missing = 0;
  for (Index i = 0; i < m.values.size(); ++i) missing += std::isnan(m.values.data()[i]) ? 1 : 0;
  return {{"rows", m.keys.size()}, {"features", m.names.size()}, {"missing_values", missing}};
}

json cmd_simulate(const RunConfig& c) {
  const auto runs = simulate_runs(c.suite, c.simulation);
  auto table = ingest_performance(runs);
  table.budget = c.simulation.budget;
  write_out(c, "runs.csv", runs_csv(runs));
  write_out(c, "performance.csv", performance_csv(table));
  write_json(c, "performance_meta.json", table.metadata());
  return performance_summary(table);
}

json cmd_ingest(const RunConfig& c) {
  auto in = open_input(c.runs_file());
  const auto table = ingest_performance(read_runs_csv(in));
  write_out(c, "performance.csv", performance_csv(table));
  write_json(c, "performance_meta.json", table.metadata());
  return performance_summary(table);
}

json cmd_evaluate(const RunConfig& c) {
  const auto data = load_dataset(c);
  std::vector<CvResult> results;
  for (const auto mode : c.modes) results.push_back(run_cv(data, mode, c.params_for(mode), c.stage_seed(4)));
  const auto report = mae_report(data, results);
  write_out(c, "mae_report.csv", report.to_csv());
  write_json(c, "mae_report.json", report.to_json());

  csv::Table t;
  t.header = {"problem_id", "instance_id"};
  for (const auto& res : results) {
    for (const auto& name : data.target_names) t.header.push_back(name + "_" + mode_name(res.mode));
  }
  for (std::size_t r = 0; r < data.keys.size(); ++r) {
    std::vector<std::string> row{std::to_string(data.keys[r].problem_id), std::to_string(data.keys[r].instance_id)};
    for (const auto& res : results) {
      for (Index k = 0; k < res.predictions.cols(); ++k) {
        row.push_back(csv::format_real(res.predictions(static_cast<Index>(r), k)));
      }
    }
    t.rows.push_back(std::move(row));
  }
  std::ostringstream pred;
  csv::write_table(pred, t);
  write_out(c, "predictions.csv", pred.str());

  json summary = report.to_json();
  summary["imputed_features"] = data.imputed_features;
  return summary;
}

json cmd_explain(const RunConfig& c) {
  const auto data = load_dataset(c);
  const InstanceKey local_key{c.explain.problem, c.explain.instance};
  Index local_row = -1;
  for (std::size_t r = 0; r < data.keys.size(); ++r) {
    if (data.keys[r] == local_key) local_row = static_cast<Index>(r);
  }
  if (local_row < 0) {
    throw InvalidArgument("unknown problem/instance for the local explanation: " + instance_label(local_key));
  }

  json summary = {{"local_instance", instance_label(local_key)}, {"modes", json::object()}};
  for (const auto mode : c.modes) {
    const std::string tag = mode_name(mode);
    const auto cv = run_cv(data, mode, c.params_for(mode), c.stage_seed(4), true);
    const auto n = data.keys.size();
    const auto nf = cv.models.size();

    std::vector<ShapExplanation> oof(n);
    std::vector<std::vector<ShapExplanation>> train(nf);
    std::vector<double> fold_error(nf, 0.0);
    parallel_for(nf, [&](std::size_t f) {
      const auto& model = cv.models[f];
      auto explain_row = [&](int r) {
        const auto x = row_of(data.x, r);
        auto e = model.explain(x, instance_label(data.keys[static_cast<std::size_t>(r)]));
        const double err = (e.output() - model.predict(x)).cwiseAbs().maxCoeff();
        fold_error[f] = std::max(fold_error[f], err);
        return e;
      };
      for (int r : model.test_rows) oof[static_cast<std::size_t>(r)] = explain_row(r);
      for (int r : model.train_rows) train[f].push_back(explain_row(r));
    });
    const double max_error = *std::max_element(fold_error.begin(), fold_error.end());

    const auto importance = global_importance(oof);
    write_out(c, "importance_" + tag + ".csv", importance.to_csv());
    write_json(c, "importance_" + tag + ".json", importance.to_json());
    write_out(c, "beeswarm_" + tag + ".csv", beeswarm_csv(beeswarm_export(oof, data.x, c.explain.beeswarm_top)));

    std::vector<GlobalImportance> fold_abs, fold_signed;
    for (const auto& t : train) {
      fold_abs.push_back(global_importance(t, true));
      fold_signed.push_back(global_importance(t, false));
    }
    const auto fold_importance = average_importance(fold_abs);
    write_out(c, "fold_importance_" + tag + ".csv", fold_importance.to_csv());
    write_out(c, "fold_importance_signed_" + tag + ".csv", average_importance(fold_signed).to_csv());

    std::vector<std::vector<std::string>> sets;
    json top = json::object();
    for (std::size_t t = 0; t < data.target_names.size(); ++t) {
      sets.push_back(top_k(fold_importance, static_cast<int>(t), c.explain.top_k));
      top[data.target_names[t]] = sets.back();
    }
    std::size_t explained = n;
    for (const auto& t : train) explained += t.size();
    json mode_summary = {{"explanations", explained}, {"max_local_accuracy_error", max_error},
                         {"top_k", top}};
    if (sets.size() == 2 || sets.size() == 3) {
      const auto venn = intersect(sets, data.target_names);
      write_out(c, "venn_" + tag + ".csv", venn.to_csv());
      write_json(c, "venn_" + tag + ".json", venn.to_json());
      mode_summary["venn_regions"] = venn.regions.size();
    }

    std::vector<RepresentationVector> reps;
    for (std::size_t t = 0; t < data.target_names.size(); ++t) {
      for (std::size_t f = 0; f < nf; ++f) {
        reps.push_back(shapley_representation(train[f], static_cast<int>(t), data.target_names[t],
                                              cv.models[f].instance_id));
      }
    }
    write_out(c, "representation_" + tag + ".csv", representation_csv(reps, data.feature_names));

    if (reps.size() >= 4) {
      Eigen::MatrixXd vectors(static_cast<Index>(reps.size()), static_cast<Index>(data.feature_names.size()));
      for (std::size_t i = 0; i < reps.size(); ++i) vectors.row(static_cast<Index>(i)) = reps[i].values.transpose();
      TsneOptions opt = c.explain.tsne;
      opt.perplexity = clamp_perplexity(opt.perplexity, vectors.rows());
      opt.seed = c.stage_seed(5);
      const auto emb = tsne(vectors, opt);
      csv::Table t;
      t.header = {"algorithm", "fold", "x", "y"};
      for (std::size_t i = 0; i < reps.size(); ++i) {
        t.rows.push_back({reps[i].algorithm, std::to_string(reps[i].fold_id),
                          csv::format_real(emb.embedding(static_cast<Index>(i), 0)),
                          csv::format_real(emb.embedding(static_cast<Index>(i), 1))});
      }
      std::ostringstream out;
      csv::write_table(out, t);
      write_out(c, "tsne_" + tag + ".csv", out.str());
      mode_summary["tsne"] = {{"points", reps.size()},
                              {"perplexity", opt.perplexity},
                              {"kl_after_exaggeration", emb.kl_after_exaggeration},
                              {"kl_final", emb.kl_final}};
    }

    const auto& local = oof[static_cast<std::size_t>(local_row)];
    const auto items = local_explanation(local, c.explain.local_top);
    write_out(c, "local_" + tag + ".csv", local_explanation_csv(items));
    write_json(c, "local_" + tag + ".json", local_explanation_json(items));
    write_out(c, "explanation_" + local.instance_id + "_" + tag + ".csv", local.to_csv());

    summary["modes"][tag] = mode_summary;
  }
  write_json(c, "explain_summary.json", summary);
  return summary;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Performance prediction from landscape features with Shapley explanations", "elaxp"};
  app.require_subcommand(1);
  std::optional<std::string> config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> profile;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_file, "JSON run configuration");
  app.add_option("--seed", seed, "Root seed (overrides the config)");
  app.add_option("--profile", profile, "Experiment profile")->check(CLI::IsMember({"desk", "paper"}));
  app.add_option("--out-dir", out_dir, "Output directory (overrides the config)");
  app.fallthrough();
  struct Verb {
    const char* name;
    const char* help;
    json (*run)(const RunConfig&);
  };
  const Verb verbs[] = {
      {"features", "Compute the ELA feature matrix", cmd_features},
      {"simulate", "Generate performance data with (1+1)-ES variants", cmd_simulate},
      {"ingest", "Aggregate a runs CSV into a performance table", cmd_ingest},
      {"evaluate", "Cross-validate STR/MTR forests and write the MAE report", cmd_evaluate},
      {"explain", "Write Shapley explanation artifacts", cmd_explain},
  };
  for (const auto& v : verbs) app.add_subcommand(v.name, v.help);

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    json overlay = json::object();
    if (config_file) {
      try {
        overlay = json::parse(csv::read_file(*config_file));
      } catch (const json::parse_error& e) {
        throw InvalidArgument("config " + *config_file + " is not valid JSON: " + e.what());
      }
      if (!overlay.is_object()) throw InvalidArgument("config must be a JSON object");
    }
    if (seed) overlay["seed"] = *seed;
    if (out_dir) overlay["paths"]["out_dir"] = *out_dir;
    const auto config = make_config(overlay, profile);
    for (const auto& v : verbs) {
      if (app.got_subcommand(v.name)) {
        const auto summary = v.run(config);
        out << summary.dump(2) << "\n";
      }
    }
    return 0;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace elaxp
