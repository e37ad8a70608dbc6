#pragma once

#include <iosfwd>

#include "elaxp/config.hpp"
#include "json.hpp"

namespace elaxp {

// Each command writes its artifacts below config.out_dir (atomically) and
// returns a JSON summary of what it did.

// features.csv, feature_catalog.json, instances.json
nlohmann::json cmd_features(const RunConfig& config);
// runs.csv, performance.csv, performance_meta.json
nlohmann::json cmd_simulate(const RunConfig& config);
// performance.csv, performance_meta.json from the runs file
nlohmann::json cmd_ingest(const RunConfig& config);
// mae_report.csv, mae_report.json, predictions.csv
nlohmann::json cmd_evaluate(const RunConfig& config);
// Per mode: importance, beeswarm, fold importance, Venn report,
// representation matrix, t-SNE coordinates, local explanation; plus
// explain_summary.json.
nlohmann::json cmd_explain(const RunConfig& config);

// Command-line entry point. Returns 0 on success, 2 on validation errors
// and 1 on any other failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace elaxp
