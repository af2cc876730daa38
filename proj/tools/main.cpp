#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ffasm/baselines.hpp"
#include "ffasm/errors.hpp"
#include "ffasm/experiment.hpp"
#include "ffasm/factor.hpp"
#include "ffasm/fda.hpp"
#include "ffasm/io.hpp"
#include "ffasm/model.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int resolve_threads(int cli_threads) {
  if (cli_threads > 0) return cli_threads;
  if (const char* env = std::getenv("FFASM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return 1;
}

// Dense and longitudinal layouts are told apart by the header line.
bool is_longitudinal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ffasm::IoError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line == "subject,covariate,time,value";
}

ffasm::FunctionalSample load_sample(const std::string& path, const nlohmann::json& config) {
  if (!is_longitudinal(path)) return ffasm::read_dense_csv(path);

  const auto records = ffasm::read_longitudinal_csv(path);
  int G = 0;
  double lo = records.front().time;
  double hi = records.front().time;
  for (const auto& r : records) {
    G = std::max(G, r.covariate + 1);
    lo = std::min(lo, r.time);
    hi = std::max(hi, r.time);
  }
  const auto data = ffasm::LongitudinalData::from_records(records, G);

  const nlohmann::json s = config.value("smoother", nlohmann::json::object());
  ffasm::SmootherConfig cfg;
  cfg.eval_grid = ffasm::Grid::uniform(s.value("grid_lo", lo), s.value("grid_hi", hi),
                                       s.value("grid_size", 51));
  if (s.contains("bandwidth")) cfg.bandwidth = s["bandwidth"].get<double>();
  cfg.bandwidth_scale = s.value("bandwidth_scale", 1.0);
  const std::string kernel = s.value("kernel", "epanechnikov");
  if (kernel == "epanechnikov")
    cfg.kernel = ffasm::Kernel::epanechnikov;
  else if (kernel == "gaussian")
    cfg.kernel = ffasm::Kernel::gaussian;
  else
    throw ffasm::IoError("unknown kernel '" + kernel + "'");
  return ffasm::smooth_sample(data, cfg);
}

int cmd_simulate(const std::string& spec_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed, int threads) {
  nlohmann::json spec_json = ffasm::read_json_file(spec_path);
  if (seed) spec_json["seed"] = *seed;
  const ffasm::ExperimentSpec spec = ffasm::experiment_from_json(spec_json);

  std::filesystem::create_directories(out_dir);
  const ffasm::ExperimentResult result = ffasm::run_experiment(spec, resolve_threads(threads));

  const auto metrics_path = std::filesystem::path(out_dir) / "metrics.csv";
  const auto summary_path = std::filesystem::path(out_dir) / "summary.json";
  const auto echo_path = std::filesystem::path(out_dir) / "experiment.json";
  ffasm::write_metrics_csv(metrics_path.string(), result.records);
  ffasm::write_json_file(summary_path.string(), ffasm::summarize(result.records));
  ffasm::write_json_file(echo_path.string(), ffasm::experiment_to_json(spec));

  std::cout << "wrote " << metrics_path.string() << " (" << result.records.size()
            << " records) and " << summary_path.string() << "\n";
  if (!result.errors.empty()) {
    for (const auto& e : result.errors) std::cerr << "job failed: " << e << "\n";
    std::cerr << result.errors.size() << " job(s) failed; partial results kept\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_fit(const std::string& x_path, const std::string& y_path,
            const std::string& config_path, const std::string& out_path,
            const std::string& method) {
  nlohmann::json config_json =
      config_path.empty() ? nlohmann::json::object() : ffasm::read_json_file(config_path);
  const ffasm::FfasmConfig cfg = ffasm::config_from_json(config_json);
  const ffasm::FunctionalSample sample = load_sample(x_path, config_json);
  const Eigen::VectorXd y = ffasm::read_response_csv(y_path);

  const ffasm::ScoreBundle bundle = ffasm::build_scores(sample, cfg.truncation);
  ffasm::FfasmFit fit;
  if (method == "ffasm")
    fit = ffasm::fit_ffasm(bundle, y, cfg);
  else if (method == "mcp")
    fit = ffasm::fit_mcp_scores(bundle, y, cfg);
  else if (method == "grmcp")
    fit = ffasm::fit_group_mcp(bundle, y, cfg);
  else
    throw ffasm::InvalidArgument("unknown method '" + method + "'");

  if (!out_path.empty()) ffasm::write_json_file(out_path, ffasm::fit_to_json(fit));

  std::cout << "selected:";
  for (int g : fit.selected) std::cout << ' ' << (g + 1);
  std::cout << "\nlambda: " << ffasm::format_double(fit.lambda) << "\nK: " << fit.K << "\n";
  for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";
  return kExitOk;
}

int cmd_factors(const std::string& x_path, int k_max, double c_n, std::optional<int> fixed_m,
                const std::string& out_path) {
  const ffasm::FunctionalSample sample = load_sample(x_path, nlohmann::json::object());
  const ffasm::Truncation trunc =
      fixed_m ? ffasm::Truncation::fixed(*fixed_m) : ffasm::Truncation::by_fve(0.95);
  const ffasm::ScoreBundle bundle = ffasm::build_scores(sample, trunc);

  ffasm::FactorSelectionConfig cfg;
  cfg.k_max = k_max;
  cfg.c_n = c_n;
  const ffasm::FactorSelection ratio = ffasm::select_num_factors_ratio(bundle.scores, cfg);
  const ffasm::FactorSelection ic =
      ffasm::select_num_factors_ic(bundle.scores.data, cfg, ffasm::InfoCriterion::ic);
  const ffasm::FactorSelection pc =
      ffasm::select_num_factors_ic(bundle.scores.data, cfg, ffasm::InfoCriterion::pc);

  const auto n = static_cast<double>(bundle.scores.n());
  nlohmann::json j;
  j["schema"] = "ffasm/v1";
  j["kind"] = "factors";
  std::vector<double> eigenvalues(ratio.eigenvalues.size());
  for (Eigen::Index i = 0; i < ratio.eigenvalues.size(); ++i)
    eigenvalues[static_cast<std::size_t>(i)] = ratio.eigenvalues[i] / n;
  j["eigenvalues"] = eigenvalues;  // spectrum of A^T A / n
  j["ratio"] = {{"K", ratio.K},
                {"criterion", std::vector<double>(ratio.criterion.data(),
                                                  ratio.criterion.data() + ratio.criterion.size())}};
  j["ic"] = {{"K", ic.K},
             {"criterion", std::vector<double>(ic.criterion.data(),
                                               ic.criterion.data() + ic.criterion.size())}};
  j["pc"] = {{"K", pc.K},
             {"criterion", std::vector<double>(pc.criterion.data(),
                                               pc.criterion.data() + pc.criterion.size())}};

  std::cout << j.dump(2) << "\n";
  if (!out_path.empty()) ffasm::write_json_file(out_path, j);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional factor augmentation selection model"};
  app.require_subcommand(1);

  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo sweep from a spec file");
  std::string spec_path, out_dir;
  std::uint64_t seed_value = 0;
  int threads = 0;
  simulate->add_option("--spec", spec_path, "Experiment spec JSON")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();
  auto* seed_opt = simulate->add_option("--seed", seed_value, "Override the spec seed");
  simulate->add_option("--threads", threads, "Worker threads (FFASM_THREADS as fallback)");

  auto* fit = app.add_subcommand("fit", "Fit a model to data on a grid or longitudinal CSV");
  std::string x_path, y_path, config_path, fit_out, method = "ffasm";
  fit->add_option("--x", x_path, "Covariate CSV (dense or longitudinal)")->required();
  fit->add_option("--y", y_path, "Response CSV")->required();
  fit->add_option("--config", config_path, "Model config JSON");
  fit->add_option("--out", fit_out, "Output fit JSON");
  fit->add_option("--method", method, "ffasm | mcp | grmcp");

  auto* factors = app.add_subcommand("factors", "Report the factor spectrum and count choices");
  std::string fx_path, factors_out;
  int k_max = 0;
  double c_n = 0.0;
  int m_value = 0;
  factors->add_option("--x", fx_path, "Covariate CSV (dense or longitudinal)")->required();
  factors->add_option("--kmax", k_max, "Largest candidate K");
  factors->add_option("--cn", c_n, "Additive constant in the ratio criterion");
  auto* m_opt = factors->add_option("--m", m_value, "Fixed score count per covariate");
  factors->add_option("--out", factors_out, "Also write the report JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      std::optional<std::uint64_t> seed;
      if (seed_opt->count() > 0) seed = seed_value;
      return cmd_simulate(spec_path, out_dir, seed, threads);
    }
    if (fit->parsed())
      return cmd_fit(x_path, y_path, config_path, fit_out, method);
    std::optional<int> fixed_m;
    if (m_opt->count() > 0) fixed_m = m_value;
    return cmd_factors(fx_path, k_max, c_n, fixed_m, factors_out);
  } catch (const ffasm::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ffasm::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ffasm::InsufficientData& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ffasm::InvalidResponse& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ffasm::ShapeMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ffasm::GridMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
