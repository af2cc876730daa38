#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "ffasm/model.hpp"
#include "ffasm/simulate.hpp"

namespace ffasm {

// Monte Carlo sweep: one cell per (G, K) or (G, rho) pair, `replications`
// independent datasets per cell, every method fit on the same score bundle.
struct ExperimentSpec {
  Scenario scenario = Scenario::factor;
  int n = 100;
  std::vector<int> G_values = {20};
  std::vector<int> K_values;       // factor sweep
  std::vector<double> rho_values;  // equal-correlation sweep
  int replications = 50;
  std::vector<std::string> methods = {"ffasm", "mcp", "grmcp"};
  std::uint64_t seed = 1;
  int m = 10;
  bool fix_loadings = false;
  FfasmConfig model;  // shared fitting configuration (seed is re-derived per rep)

  void validate() const;
};

ExperimentSpec experiment_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentSpec& spec);

struct RunRecord {
  Scenario scenario = Scenario::factor;
  std::string method;
  double param = 0.0;  // K or rho
  int G = 0;
  int rep = 0;
  double imse_value = 0.0;
  double tpr_value = 0.0;
  int model_size = 0;
  std::vector<int> selected;  // 0-based covariates
  double runtime_ms = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> records;  // ordered by (cell, rep, method)
  std::vector<std::string> errors;
};

// Runs the sweep on a work queue of (cell, replication) jobs. Seeds are
// derived from (spec.seed, cell, rep) alone, so results do not depend on the
// thread count. Failed jobs leave their records out and add an error line.
ExperimentResult run_experiment(const ExperimentSpec& spec, int threads);

// Long format: scenario,method,param,G,rep,metric,value with metrics imse,
// tpr, model_size. Runtime stays out so reruns are byte-identical.
void write_metrics_csv(const std::string& path, const std::vector<RunRecord>& records);

// Per-cell, per-method aggregates: mean/sd of each metric plus the
// selection-rule frequencies over replications.
nlohmann::json summarize(const std::vector<RunRecord>& records);

}  // namespace ffasm
