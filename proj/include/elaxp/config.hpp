#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "elaxp/pipeline.hpp"
#include "elaxp/tsne.hpp"
#include "json.hpp"

namespace elaxp {

struct ExplainConfig {
  int problem = 4;
  int instance = 1;
  int top_k = 10;
  int beeswarm_top = 20;
  int local_top = 10;
  TsneOptions tsne;  // seed is derived from the run seed
};

struct RunConfig {
  std::string profile = "desk";
  std::uint64_t seed = 1;
  SuiteConfig suite;
  FeatureConfig features;
  SimulationConfig simulation;
  int folds = 10;
  std::vector<Mode> modes{Mode::STR, Mode::MTR};
  bool log_targets = false;
  ForestParams str_params = ForestParams::str_defaults();
  ForestParams mtr_params = ForestParams::mtr_defaults();
  ExplainConfig explain;
  std::filesystem::path out_dir = "out";
  // Empty paths default to files inside out_dir.
  std::filesystem::path features_path;
  std::filesystem::path runs_path;
  std::filesystem::path performance_path;

  std::filesystem::path features_file() const;
  std::filesystem::path runs_file() const;
  std::filesystem::path performance_file() const;
  const ForestParams& params_for(Mode mode) const { return mode == Mode::STR ? str_params : mtr_params; }

  // Stage seeds derived from the root seed: 1 suite, 2 features,
  // 3 simulation, 4 cross-validation, 5 t-SNE.
  std::uint64_t stage_seed(std::uint64_t stage) const;

  nlohmann::json to_json() const;
};

// The full key set with the values of a profile ("desk" or "paper").
nlohmann::json profile_defaults(const std::string& profile);

// Overlays `overlay` on the profile chosen by (profile_override, the overlay's
// "profile" key, "desk"), rejecting unknown keys, then validates.
RunConfig make_config(const nlohmann::json& overlay, const std::optional<std::string>& profile_override = {});

RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::optional<std::string>& profile_override = {});

}  // namespace elaxp
