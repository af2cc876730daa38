#include "ffasm/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>
#include <tuple>

#include "ffasm/baselines.hpp"
#include "ffasm/errors.hpp"
#include "ffasm/io.hpp"
#include "ffasm/metrics.hpp"
#include "ffasm/rng.hpp"

namespace ffasm {

namespace {

// Generator truth sets (covariates 0..3 strong, 4..5 weak).
const std::vector<int> kType1 = {0, 1, 2, 3};
const std::vector<int> kType2 = {4, 5};

std::vector<double> json_number_list(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>()};
  return j.get<std::vector<double>>();
}

std::string scenario_name(Scenario s) {
  return s == Scenario::factor ? "factor" : "equal_corr";
}

struct Cell {
  int G = 0;
  double param = 0.0;  // K or rho
};

std::vector<Cell> make_cells(const ExperimentSpec& spec) {
  std::vector<Cell> cells;
  if (spec.scenario == Scenario::factor) {
    for (int G : spec.G_values)
      for (int K : spec.K_values) cells.push_back({G, static_cast<double>(K)});
  } else {
    for (int G : spec.G_values)
      for (double rho : spec.rho_values) cells.push_back({G, rho});
  }
  return cells;
}

struct Aggregate {
  std::vector<double> imse, tpr, size, runtime;
  std::vector<std::vector<int>> selected;
};

nlohmann::json mean_sd(const std::vector<double>& values) {
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  return {{"mean", mean}, {"sd", sd}};
}

}  // namespace

void ExperimentSpec::validate() const {
  if (replications < 1) throw InvalidArgument("ExperimentSpec: replications must be >= 1");
  if (methods.empty()) throw InvalidArgument("ExperimentSpec: methods list is empty");
  for (const auto& m : methods)
    if (m != "ffasm" && m != "mcp" && m != "grmcp")
      throw InvalidArgument("ExperimentSpec: unknown method '" + m + "'");
  if (G_values.empty()) throw InvalidArgument("ExperimentSpec: no G values");
  if (scenario == Scenario::factor && K_values.empty())
    throw InvalidArgument("ExperimentSpec: factor scenario needs K values");
  if (scenario == Scenario::equal_corr && rho_values.empty())
    throw InvalidArgument("ExperimentSpec: equal-correlation scenario needs rho values");
  if (scenario == Scenario::factor && !rho_values.empty())
    throw InvalidArgument("ExperimentSpec: rho values are not used by the factor scenario");
  if (scenario == Scenario::equal_corr && !K_values.empty())
    throw InvalidArgument("ExperimentSpec: K values are not used by the equal-correlation scenario");
  model.validate();
}

ExperimentSpec experiment_from_json(const nlohmann::json& j) {
  ExperimentSpec spec;
  const std::string scenario = j.value("scenario", "factor");
  if (scenario == "factor")
    spec.scenario = Scenario::factor;
  else if (scenario == "equal_corr")
    spec.scenario = Scenario::equal_corr;
  else
    throw IoError("experiment: unknown scenario '" + scenario + "'");
  spec.n = j.value("n", spec.n);
  if (j.contains("G")) {
    spec.G_values.clear();
    for (double v : json_number_list(j["G"])) spec.G_values.push_back(static_cast<int>(v));
  }
  if (j.contains("K")) {
    for (double v : json_number_list(j["K"])) spec.K_values.push_back(static_cast<int>(v));
  }
  if (j.contains("rho")) spec.rho_values = json_number_list(j["rho"]);
  spec.replications = j.value("replications", spec.replications);
  spec.methods = j.value("methods", spec.methods);
  spec.seed = j.value("seed", spec.seed);
  spec.m = j.value("m", spec.m);
  spec.fix_loadings = j.value("fix_loadings", spec.fix_loadings);
  // Harness default: fixed truncation at m basis functions.
  nlohmann::json model = j.value("model", nlohmann::json::object());
  if (!model.contains("truncation")) model["truncation"] = {{"fixed_m", spec.m}};
  spec.model = config_from_json(model);
  spec.validate();
  return spec;
}

nlohmann::json experiment_to_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["schema"] = "ffasm/v1";
  j["kind"] = "experiment";
  j["scenario"] = scenario_name(spec.scenario);
  j["n"] = spec.n;
  j["G"] = spec.G_values;
  if (spec.scenario == Scenario::factor)
    j["K"] = spec.K_values;
  else
    j["rho"] = spec.rho_values;
  j["replications"] = spec.replications;
  j["methods"] = spec.methods;
  j["seed"] = spec.seed;
  j["m"] = spec.m;
  j["fix_loadings"] = spec.fix_loadings;
  j["model"] = config_to_json(spec.model);
  return j;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, int threads) {
  spec.validate();
  const std::vector<Cell> cells = make_cells(spec);
  const int R = spec.replications;
  const int n_methods = static_cast<int>(spec.methods.size());
  const int n_jobs = static_cast<int>(cells.size()) * R;

  std::vector<RunRecord> slots(static_cast<std::size_t>(n_jobs) * n_methods);
  std::vector<char> ok(static_cast<std::size_t>(n_jobs), 0);
  std::vector<std::string> job_errors(static_cast<std::size_t>(n_jobs));

  auto run_job = [&](int job) {
    const int ci = job / R;
    const int rep = job % R;
    const Cell& cell = cells[static_cast<std::size_t>(ci)];

    ScenarioConfig scfg;
    scfg.scenario = spec.scenario;
    scfg.n = spec.n;
    scfg.n_covariates = cell.G;
    scfg.m = spec.m;
    if (spec.scenario == Scenario::factor)
      scfg.K = static_cast<int>(cell.param);
    else
      scfg.rho = cell.param;
    scfg.fix_loadings = spec.fix_loadings;
    scfg.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(ci));
    scfg.rep = rep;

    const SimulatedData data = generate(scfg);
    const ScoreBundle bundle = build_scores(data.sample, spec.model.truncation);

    FfasmConfig mcfg = spec.model;
    mcfg.seed = derive_seed(derive_seed(scfg.seed, static_cast<std::uint64_t>(rep)),
                            0x5eedCeeDull);

    for (int mi = 0; mi < n_methods; ++mi) {
      const std::string& method = spec.methods[static_cast<std::size_t>(mi)];
      const auto t0 = std::chrono::steady_clock::now();
      FfasmFit fit;
      if (method == "ffasm")
        fit = fit_ffasm(bundle, data.responses, mcfg);
      else if (method == "mcp")
        fit = fit_mcp_scores(bundle, data.responses, mcfg);
      else
        fit = fit_group_mcp(bundle, data.responses, mcfg);
      const auto t1 = std::chrono::steady_clock::now();

      RunRecord rec;
      rec.scenario = spec.scenario;
      rec.method = method;
      rec.param = cell.param;
      rec.G = cell.G;
      rec.rep = rep;
      rec.imse_value = imse(fit.beta_curves, data.truth.betas, data.sample.grid);
      rec.tpr_value = tpr(fit.selected, data.truth.support);
      rec.model_size = static_cast<int>(fit.selected.size());
      rec.selected = fit.selected;
      rec.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      slots[static_cast<std::size_t>(job) * n_methods + mi] = std::move(rec);
    }
    ok[static_cast<std::size_t>(job)] = 1;
  };

  const int n_workers = std::max(1, std::min(threads, n_jobs));
  std::atomic<int> next{0};
  auto worker = [&] {
    while (true) {
      const int job = next.fetch_add(1);
      if (job >= n_jobs) return;
      try {
        run_job(job);
      } catch (const std::exception& e) {
        job_errors[static_cast<std::size_t>(job)] = e.what();
      }
    }
  };
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  result.records.reserve(slots.size());
  for (int job = 0; job < n_jobs; ++job) {
    if (!ok[static_cast<std::size_t>(job)]) {
      const int ci = job / R;
      result.errors.push_back("cell " + std::to_string(ci) + " rep " +
                              std::to_string(job % R) + ": " +
                              job_errors[static_cast<std::size_t>(job)]);
      continue;
    }
    for (int mi = 0; mi < n_methods; ++mi)
      result.records.push_back(
          std::move(slots[static_cast<std::size_t>(job) * n_methods + mi]));
  }
  return result;
}

void write_metrics_csv(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "scenario,method,param,G,rep,metric,value\n";
  for (const auto& r : records) {
    const std::string prefix = scenario_name(r.scenario) + "," + r.method + "," +
                               format_double(r.param) + "," + std::to_string(r.G) + "," +
                               std::to_string(r.rep) + ",";
    out << prefix << "imse," << format_double(r.imse_value) << "\n";
    out << prefix << "tpr," << format_double(r.tpr_value) << "\n";
    out << prefix << "model_size," << r.model_size << "\n";
  }
  if (!out) throw IoError("failed while writing " + path);
}

nlohmann::json summarize(const std::vector<RunRecord>& records) {
  // Key: (scenario, G, param, method), in first-encounter order.
  std::vector<std::tuple<Scenario, int, double, std::string>> order;
  std::map<std::tuple<int, int, double, std::string>, Aggregate> groups;
  for (const auto& r : records) {
    const auto key = std::make_tuple(static_cast<int>(r.scenario), r.G, r.param, r.method);
    if (groups.find(key) == groups.end())
      order.emplace_back(r.scenario, r.G, r.param, r.method);
    Aggregate& agg = groups[key];
    agg.imse.push_back(r.imse_value);
    agg.tpr.push_back(r.tpr_value);
    agg.size.push_back(static_cast<double>(r.model_size));
    agg.runtime.push_back(r.runtime_ms);
    agg.selected.push_back(r.selected);
  }

  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [scenario, G, param, method] : order) {
    const Aggregate& agg =
        groups.at(std::make_tuple(static_cast<int>(scenario), G, param, method));
    nlohmann::json cell;
    cell["scenario"] = scenario_name(scenario);
    cell["G"] = G;
    cell["param"] = param;
    cell["method"] = method;
    cell["replications"] = agg.imse.size();
    cell["imse"] = mean_sd(agg.imse);
    cell["tpr"] = mean_sd(agg.tpr);
    cell["model_size"] = mean_sd(agg.size);
    cell["runtime_ms"] = mean_sd(agg.runtime);
    cell["selection_frequency"] = {
        {"type1_atleast3",
         selection_frequency(SelectionRule::type1_atleast3, agg.selected, kType1, kType2)},
        {"type2_atleast1",
         selection_frequency(SelectionRule::type2_atleast1, agg.selected, kType1, kType2)},
        {"all_type1",
         selection_frequency(SelectionRule::all_type1, agg.selected, kType1, kType2)},
        {"all_type2",
         selection_frequency(SelectionRule::all_type2, agg.selected, kType1, kType2)}};
    cells.push_back(std::move(cell));
  }

  nlohmann::json j;
  j["schema"] = "ffasm/v1";
  j["kind"] = "summary";
  j["cells"] = std::move(cells);
  return j;
}

}  // namespace ffasm
